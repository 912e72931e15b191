#pragma once

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "rmt/common.hpp"

namespace rmt {

/// Parameters of the quartic coupled potential
///
///   V(x) = (a/n) (sum_i (x_i^2 - m_bc))^2 + b sum_i x_i^2 + c_pot sum_i x_i^4
///
/// The cached constants m_bc and sigma_bc are the second moment and the
/// variance of x^2 under the decoupled (a = 0) one-dimensional reference law
/// proportional to exp(-b x^2 - c_pot x^4). They are computed by quadrature at
/// construction and never re-estimated.
struct PotentialParams {
  double a = 0.0;      ///< coupling strength of the squared-sum term, >= 0
  double b = 0.5;      ///< quadratic coefficient, > 0
  double c_pot = 0.0;  ///< quartic coefficient, >= 0
  double m_bc = 1.0;   ///< cached E_{0,b,c}[x^2]
  double sigma_bc = 2.0;  ///< cached Var_{0,b,c}(x^2)

  /// Builds validated params with the derived constants filled in.
  static PotentialParams create(double a, double b, double c_pot);

  static PotentialParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// V(x). Rejects non-finite components.
double eval_potential(const PotentialParams& p,
                      const Eigen::Ref<const Eigen::VectorXd>& x);

/// Gradient of V; component i is
/// (4a/n)(sum_j (x_j^2 - m_bc)) x_i + 2b x_i + 4 c_pot x_i^3.
Eigen::VectorXd grad_potential(const PotentialParams& p,
                               const Eigen::Ref<const Eigen::VectorXd>& x);

/// k-th moment of the 1-D reference law ~ exp(-b x^2 - c_pot x^4).
/// Odd moments are exactly 0 by symmetry (no quadrature performed).
double moment_1d(double b, double c_pot, int k);

/// m_{b,c} = E_{0,b,c}[x^2].
double compute_mbc(double b, double c_pot);

/// sigma_{b,c} = Var_{0,b,c}(x^2) = E[x^4] - E[x^2]^2.
double compute_sigma_bc(double b, double c_pot);

/// Truncation point for the reference-law quadrature: integrand has decayed
/// below 1e-18 of its peak beyond |x| > x_max.
double quadrature_xmax(double b, double c_pot);

}  // namespace rmt
