#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "rmt/common.hpp"

namespace rmt::theory {

/// Limit parameters: aspect ratio c = lim m/n (>= 1), offset sigma = lim
/// (c n - m), fourth moment mu = E[X_i^4], and kappa = lim n^{-1} Var(sum
/// X_i^2).
struct TheoryParams {
  double c = 1.0;
  double sigma = 0.0;
  double mu = 3.0;
  double kappa = 2.0;
};

/// Region {z = u + iv : |v| >= v0, |z| < R} on which grid evaluations live.
struct EvalRegion {
  double v0 = 0.1;
  double R = 10.0;
  bool contains(cplx z) const {
    return std::abs(z.imag()) >= v0 && std::abs(z) < R;
  }
};

/// Limiting support of the eigenvalues of W: two symmetric intervals plus the
/// structural atom at zero carrying the m - n exact zero eigenvalues.
struct SupportDescription {
  std::array<double, 2> negative_interval;  // [-1-sqrt(c), 1-sqrt(c)]
  std::array<double, 2> positive_interval;  // [sqrt(c)-1, sqrt(c)+1]
  double atom_at_zero_mass;                 // (c-1)/(1+c)
};

// Closed-form Stieltjes transforms of the limit law and its blocks.
// The square-root branch is selected pointwise by the Herglotz sign
// Im(s) * Im(z) > 0, never by a global convention.
cplx s1_closed(cplx z, double c);
cplx s2_closed(cplx z, double c);
cplx s_closed(cplx z, double c);

// Analytic z-derivatives of the closed forms (implicit differentiation of the
// defining quadratics). Throws NumericalError near a branch point
// (|discriminant| < 1e-12).
cplx ds1(cplx z, double c);
cplx ds2(cplx z, double c);

/// The limiting mean of the linear-statistics process:
///
///   M(z) = sigma s2 + (1 + c ds2) s1^3 [ -ds1/s1^2
///              + c ((4 mu - 5) s2^2 + 2 ds2) ]
///        + (1 + ds1) c s2^3 [ -ds2/s2^2
///              + (2 (mu - 2 + kappa/2) s1^2 + 2 ds1) ]
cplx M_closed(cplx z, const TheoryParams& p);

/// Damped fixed-point iteration of s1 <- -1/(z + c s2), s2 <- -1/(z + s1)
/// from (-1/z, -1/z). Requires |Im z| >= 0.1 (contraction regime); residual
/// target 1e-12. Throws NumericalError on non-convergence.
std::pair<cplx, cplx> self_consistent_solve(cplx z, double c);

SupportDescription mp_support(double c);

/// Continuous part of the limit density by Stieltjes inversion:
/// (1/pi) Im s(x + i eps). Excludes the zero atom. Requires eps in (0, 1e-2].
double density_F(double x, double c, double eps);

/// Derivative handles f, f', ..., f^(L) of a compactly supported test
/// function; handle l evaluates the l-th derivative.
using DerivList = std::vector<std::function<double(double)>>;

/// C^(p-1) polynomial bump f(x) = (1 - t^2)^p on |t| < 1, t = (x-center)/halfwidth,
/// zero outside. Derivatives of any order are available in closed form.
class PolyBump {
 public:
  PolyBump(double center, double halfwidth, int p);
  double deriv(int l, double x) const;
  double operator()(double x) const { return deriv(0, x); }
  DerivList derivs(int count) const;  // handles for l = 0..count-1
  double lower() const { return center_ - halfwidth_; }
  double upper() const { return center_ + halfwidth_; }
  int smoothness() const { return p_ - 1; }  // f is C^(p-1)

 private:
  double center_, halfwidth_;
  int p_;
  // coeffs_[l] holds the polynomial coefficients (in t) of the l-th
  // t-derivative of (1 - t^2)^p.
  std::vector<std::vector<double>> coeffs_;
};

/// Quasi-analytic extension Psi_f(x, y) = sum_{l=0}^K (i^l / l!) f^(l)(x)
/// g(y) y^l with a fixed smooth plateau cutoff g (g = 1 on [-c0/2, c0/2],
/// smooth monotone to 0 at |y| = c0). K is f_derivs.size() - 1.
cplx psi_extension(const DerivList& f_derivs, double x, double y, double c0);

/// The plateau cutoff itself (exposed for tests).
double plateau_cutoff(double y, double c0);

struct HsQuadSpec {
  double c0 = 1.0;        // cutoff radius in y
  double y_min = 1e-4;    // lower integration bound, Richardson-extrapolated
  int nx = 257;           // initial x panels + 1 (refined by doubling)
  int ny = 129;           // initial y nodes (geometric grid)
  int max_refinements = 5;
  double rel_tol = 1e-3;  // stop when successive refinements agree to this
};

/// Helffer-Sjostrand reconstruction of the limit mean linear statistic:
/// Re int_0^inf dy int dx dbar(Psi_f)(x, y) M(x + i y), with
/// dbar = pi^-1 (d_x + i d_y) evaluated by central differences of
/// psi_extension with step 1e-6. [xa, xb] must contain the support of f.
/// Throws NumericalError if grid refinement does not settle to rel_tol.
double hs_functional(const DerivList& f_derivs, double xa, double xb,
                     const TheoryParams& p, const HsQuadSpec& quad);

}  // namespace rmt::theory
