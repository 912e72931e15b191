// Independent oracles used by the tests. Everything here recomputes target
// quantities by a different route than the library (dense eigensolvers,
// contour integrals, Gauss-Legendre quadrature, long-double arithmetic) so
// agreement is evidence, not tautology.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "rmt/common.hpp"
#include "rmt/ensemble.hpp"
#include "rmt/theory.hpp"

namespace oracles {

using rmt::cplx;

/// Eigenvalues of the full (n+m) x (n+m) block matrix W by a dense symmetric
/// eigensolver, sorted ascending. The brute-force counterpart of the
/// singular-value route.
inline std::vector<double> dense_W_eigenvalues(const rmt::DataMatrix& Y) {
  Eigen::MatrixXd W = rmt::assemble_W(Y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W, Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(),
                          es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

/// Tr((A - z)^-1) by direct dense inversion.
inline cplx direct_resolvent_trace(const Eigen::MatrixXd& A, cplx z) {
  Eigen::MatrixXcd B = A.cast<cplx>();
  B.diagonal().array() -= z;
  return B.inverse().trace();
}

/// Stieltjes transform of the semicircle law on [-2, 2]:
/// s(z) = (-z + sqrt(z^2 - 4)) / 2, branch with Im s * Im z > 0.
inline cplx semicircle_stieltjes(cplx z) {
  cplx r = std::sqrt(z * z - 4.0);
  cplx s = (-z + r) / 2.0;
  if (s.imag() * z.imag() <= 0.0) s = (-z - r) / 2.0;
  return s;
}

/// Derivative of a holomorphic function by the Cauchy integral
/// f'(z) = (1/2 pi i) \oint f(w) / (w - z)^2 dw over a circle of the given
/// radius. The trapezoid rule on a circle is spectrally accurate, so 64
/// nodes already reach ~1e-13 relative error for our resolvent-type
/// functions when the radius stays inside the domain of analyticity.
inline cplx cauchy_derivative(const std::function<cplx(cplx)>& f, cplx z,
                              double radius, int nodes = 64) {
  cplx acc = 0.0;
  for (int k = 0; k < nodes; ++k) {
    double th = 2.0 * M_PI * k / nodes;
    cplx w = z + radius * cplx(std::cos(th), std::sin(th));
    // dw = i r e^{i th} dth; the (w - z)^2 denominator leaves e^{-i th} / r.
    acc += f(w) * cplx(std::cos(th), -std::sin(th));
  }
  return acc / (static_cast<double>(nodes) * radius);
}

/// Composite Gauss-Legendre quadrature (20-point rule per panel) of f over
/// [a, b]; the independent counterpart of the adaptive-Simpson route.
inline double gauss_legendre(const std::function<double(double)>& f, double a,
                             double b, int panels = 64) {
  // 20-point Gauss-Legendre nodes/weights on [-1, 1] (symmetric halves).
  static const double xs[10] = {
      0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
      0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
      0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
      0.9931285991850949};
  static const double ws[10] = {
      0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
      0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
      0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
      0.0176140071391521};
  double total = 0.0;
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double mid = a + (p + 0.5) * h;
    double half = 0.5 * h;
    for (int i = 0; i < 10; ++i)
      total += ws[i] * half * (f(mid + half * xs[i]) + f(mid - half * xs[i]));
  }
  return total;
}

/// k-th moment of the law ~ exp(-b x^2 - c x^4) by Gauss-Legendre.
inline double moment_1d_gl(double b, double c, int k) {
  double xmax = rmt::quadrature_xmax(b, c);
  auto weight = [&](double x) { return std::exp(-b * x * x - c * x * x * x * x); };
  double Z = 2.0 * gauss_legendre(weight, 0.0, xmax);
  auto num = [&](double x) { return std::pow(x, k) * weight(x); };
  double I = (k % 2 == 0) ? 2.0 * gauss_legendre(num, 0.0, xmax) : 0.0;
  return I / Z;
}

/// Long-double evaluation of the coupled potential, computed independently of
/// the library implementation.
inline double potential_value_ld(double a, double b, double c_pot, double m_bc,
                                 const std::vector<double>& x) {
  long double s2 = 0.0L, s4 = 0.0L;
  for (double xi : x) {
    long double q = static_cast<long double>(xi) * xi;
    s2 += q;
    s4 += q * q;
  }
  long double centered = s2 - static_cast<long double>(x.size()) * m_bc;
  long double v = static_cast<long double>(a) / x.size() * centered * centered +
                  static_cast<long double>(b) * s2 +
                  static_cast<long double>(c_pot) * s4;
  return static_cast<double>(v);
}

/// Independent re-implementation of the limiting mean formula M(z): every
/// bracketed factor is evaluated separately, with s1, s2 recomputed from the
/// self-consistent fixed point (not the closed forms) and the derivatives by
/// the Cauchy contour oracle.
inline cplx M_independent(cplx z, const rmt::theory::TheoryParams& p) {
  auto [s1, s2] = rmt::theory::self_consistent_solve(z, p.c);
  double radius = std::min(0.4, 0.5 * std::abs(z.imag()));
  cplx d1 = cauchy_derivative(
      [&](cplx w) { return rmt::theory::s1_closed(w, p.c); }, z, radius);
  cplx d2 = cauchy_derivative(
      [&](cplx w) { return rmt::theory::s2_closed(w, p.c); }, z, radius);
  const double c = p.c, mu = p.mu, kappa = p.kappa;
  cplx bracket1 = -d1 / (s1 * s1) + c * ((4.0 * mu - 5.0) * s2 * s2 + 2.0 * d2);
  cplx bracket2 =
      -d2 / (s2 * s2) +
      (2.0 * (mu - 2.0 + kappa / 2.0) * s1 * s1 + 2.0 * d1);
  cplx term1 = (1.0 + c * d2) * s1 * s1 * s1 * bracket1;
  cplx term2 = (1.0 + d1) * c * s2 * s2 * s2 * bracket2;
  return p.sigma * s2 + term1 + term2;
}

/// Central finite difference of a scalar function of a vector.
inline double central_diff(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x, int i, double h) {
  Eigen::VectorXd xp = x, xm = x;
  xp[i] += h;
  xm[i] -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

}  // namespace oracles
