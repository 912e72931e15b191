#include "rmt/potential.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "rmt/quadrature.hpp"

namespace rmt {

static void validate_abc(double a, double b, double c_pot) {
  if (!(a >= 0.0) || !std::isfinite(a))
    throw ConfigError("PotentialParams: a must be finite and >= 0");
  if (!(b > 0.0) || !std::isfinite(b))
    throw ConfigError("PotentialParams: b must be finite and > 0");
  if (!(c_pot >= 0.0) || !std::isfinite(c_pot))
    throw ConfigError("PotentialParams: c_pot must be finite and >= 0");
}

PotentialParams PotentialParams::create(double a, double b, double c_pot) {
  validate_abc(a, b, c_pot);
  PotentialParams p;
  p.a = a;
  p.b = b;
  p.c_pot = c_pot;
  p.m_bc = compute_mbc(b, c_pot);
  p.sigma_bc = compute_sigma_bc(b, c_pot);
  return p;
}

PotentialParams PotentialParams::from_json(const nlohmann::json& j) {
  // Derived fields are recomputed, never trusted from the file.
  for (const char* key : {"a", "b", "c_pot"})
    if (!j.contains(key) || !j.at(key).is_number())
      throw ConfigError(std::string("PotentialParams: missing or non-numeric "
                                    "field \"") +
                        key + "\"");
  return create(j.at("a").get<double>(), j.at("b").get<double>(),
                j.at("c_pot").get<double>());
}

nlohmann::json PotentialParams::to_json() const {
  return nlohmann::json{{"a", a}, {"b", b}, {"c_pot", c_pot}};
}

double eval_potential(const PotentialParams& p,
                      const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto n = x.size();
  if (n < 1) throw ConfigError("eval_potential: empty vector");
  if (!x.allFinite())
    throw ConfigError("eval_potential: non-finite input component");
  const Eigen::ArrayXd sq = x.array().square();
  double centered = (sq - p.m_bc).sum();
  return p.a / static_cast<double>(n) * centered * centered + p.b * sq.sum() +
         p.c_pot * sq.square().sum();
}

Eigen::VectorXd grad_potential(const PotentialParams& p,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto n = x.size();
  if (n < 1) throw ConfigError("grad_potential: empty vector");
  const Eigen::ArrayXd sq = x.array().square();
  double centered = (sq - p.m_bc).sum();
  double coupling = 4.0 * p.a / static_cast<double>(n) * centered;
  return ((coupling + 2.0 * p.b) * x.array() +
          4.0 * p.c_pot * x.array() * sq)
      .matrix();
}

double quadrature_xmax(double b, double c_pot) {
  // Peak of exp(-b x^2 - c x^4) is at 0; find x with b x^2 + c x^4 >= ln 1e18.
  const double target = 18.0 * std::log(10.0);
  double x = 1.0;
  while (b * x * x + c_pot * x * x * x * x < target) x *= 1.5;
  return x;
}

double moment_1d(double b, double c_pot, int k) {
  if (k < 0) throw ConfigError("moment_1d: k must be nonnegative");
  validate_abc(0.0, b, c_pot);
  if (k % 2 == 1) return 0.0;  // symmetry
  const double xmax = quadrature_xmax(b, c_pot);
  auto weight = [b, c_pot](double x) {
    return std::exp(-b * x * x - c_pot * x * x * x * x);
  };
  // Even integrands: integrate over [0, xmax]; the factor 2 cancels in the
  // ratio. Absolute tolerance 1e-10 on the normalized moment.
  double z = adaptive_simpson(weight, 0.0, xmax, 1e-14);
  double num = adaptive_simpson(
      [&](double x) { return std::pow(x, k) * weight(x); }, 0.0, xmax,
      1e-11 * z);
  return num / z;
}

double compute_mbc(double b, double c_pot) { return moment_1d(b, c_pot, 2); }

double compute_sigma_bc(double b, double c_pot) {
  double m = compute_mbc(b, c_pot);
  double s = moment_1d(b, c_pot, 4) - m * m;
  return s < 0.0 ? 0.0 : s;
}

}  // namespace rmt
