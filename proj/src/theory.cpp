#include "rmt/theory.hpp"

#include <cmath>

namespace rmt::theory {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_offaxis(cplx z, const char* who) {
  if (z.imag() == 0.0)
    throw ConfigError(std::string(who) + ": Im z must be nonzero");
}

// Root of a2 s^2 + a1 s + a0 = 0 selected by the Herglotz sign
// Im(s) Im(z) > 0; ties (which occur only off the physical sheet) fall back
// to the decaying root, since the Stieltjes branch behaves like -1/z at
// infinity and the two roots have product a0/a2.
cplx herglotz_root(cplx a2, cplx a1, cplx a0, cplx z) {
  cplx w = std::sqrt(a1 * a1 - 4.0 * a2 * a0);
  cplx r1 = (-a1 + w) / (2.0 * a2);
  cplx r2 = (-a1 - w) / (2.0 * a2);
  bool h1 = r1.imag() * z.imag() > 0.0;
  bool h2 = r2.imag() * z.imag() > 0.0;
  if (h1 != h2) return h1 ? r1 : r2;
  return std::abs(r1) <= std::abs(r2) ? r1 : r2;
}

void check_c(double c) {
  if (!(c >= 1.0)) throw ConfigError("aspect ratio c must be >= 1");
}

cplx disc1(cplx z, double c) {
  cplx q = z * z - c + 1.0;
  return q * q - 4.0 * z * z;
}

cplx disc2(cplx z, double c) {
  cplx q = z * z + c - 1.0;
  return q * q - 4.0 * c * z * z;
}

}  // namespace

cplx s1_closed(cplx z, double c) {
  require_offaxis(z, "s1_closed");
  check_c(c);
  // z s^2 + (z^2 - c + 1) s + z = 0
  return herglotz_root(z, z * z - c + 1.0, z, z);
}

cplx s2_closed(cplx z, double c) {
  require_offaxis(z, "s2_closed");
  check_c(c);
  // c z s^2 + (z^2 + c - 1) s + z = 0
  return herglotz_root(c * z, z * z + c - 1.0, z, z);
}

cplx s_closed(cplx z, double c) {
  return (s1_closed(z, c) + c * s2_closed(z, c)) / (1.0 + c);
}

cplx ds1(cplx z, double c) {
  require_offaxis(z, "ds1");
  if (std::abs(disc1(z, c)) < 1e-12)
    throw NumericalError("ds1: branch-point proximity");
  cplx s = s1_closed(z, c);
  // Implicit differentiation of z s^2 + (z^2-c+1) s + z = 0.
  return -(s * s + 2.0 * z * s + 1.0) / (2.0 * z * s + z * z - c + 1.0);
}

cplx ds2(cplx z, double c) {
  require_offaxis(z, "ds2");
  if (std::abs(disc2(z, c)) < 1e-12)
    throw NumericalError("ds2: branch-point proximity");
  cplx s = s2_closed(z, c);
  // Implicit differentiation of c z s^2 + (z^2+c-1) s + z = 0.
  return -(c * s * s + 2.0 * z * s + 1.0) /
         (2.0 * c * z * s + z * z + c - 1.0);
}

cplx M_closed(cplx z, const TheoryParams& p) {
  require_offaxis(z, "M_closed");
  const double c = p.c;
  cplx s1 = s1_closed(z, c), s2 = s2_closed(z, c);
  cplx d1 = ds1(z, c), d2 = ds2(z, c);
  cplx bracket1 =
      -d1 / (s1 * s1) + c * ((4.0 * p.mu - 5.0) * s2 * s2 + 2.0 * d2);
  cplx bracket2 = -d2 / (s2 * s2) +
                  (2.0 * (p.mu - 2.0 + 0.5 * p.kappa) * s1 * s1 + 2.0 * d1);
  return p.sigma * s2 + (1.0 + c * d2) * s1 * s1 * s1 * bracket1 +
         (1.0 + d1) * c * s2 * s2 * s2 * bracket2;
}

std::pair<cplx, cplx> self_consistent_solve(cplx z, double c) {
  check_c(c);
  if (std::abs(z.imag()) < 0.1)
    throw ConfigError("self_consistent_solve: |Im z| must be >= 0.1");
  cplx s1 = -1.0 / z, s2 = -1.0 / z;
  const double damp = 0.5;
  const int max_iter = 100000;
  for (int it = 0; it < max_iter; ++it) {
    cplx n1 = -1.0 / (z + c * s2);
    cplx n2 = -1.0 / (z + n1);
    s1 = (1.0 - damp) * s1 + damp * n1;
    s2 = (1.0 - damp) * s2 + damp * n2;
    double res = std::abs(s1 + 1.0 / (z + c * s2)) +
                 std::abs(s2 + 1.0 / (z + s1));
    if (res <= 1e-12) return {s1, s2};
  }
  throw NumericalError("self_consistent_solve: no convergence");
}

SupportDescription mp_support(double c) {
  check_c(c);
  double r = std::sqrt(c);
  return {{-1.0 - r, 1.0 - r}, {r - 1.0, r + 1.0}, (c - 1.0) / (1.0 + c)};
}

double density_F(double x, double c, double eps) {
  if (!(eps > 0.0 && eps <= 1e-2))
    throw ConfigError("density_F: eps must be in (0, 1e-2]");
  return s_closed(cplx(x, eps), c).imag() / kPi;
}

// ---------------------------------------------------------------------------
// PolyBump
// ---------------------------------------------------------------------------

PolyBump::PolyBump(double center, double halfwidth, int p)
    : center_(center), halfwidth_(halfwidth), p_(p) {
  if (!(halfwidth > 0.0) || p < 1)
    throw ConfigError("PolyBump: need halfwidth > 0 and p >= 1");
  // (1 - t^2)^p expanded in t.
  std::vector<double> base(static_cast<std::size_t>(2 * p + 1), 0.0);
  double binom = 1.0;
  for (int j = 0; j <= p; ++j) {
    base[static_cast<std::size_t>(2 * j)] = (j % 2 == 0 ? binom : -binom);
    binom = binom * (p - j) / (j + 1.0);
  }
  coeffs_.push_back(base);
  // All t-derivatives down to the zero polynomial.
  while (coeffs_.back().size() > 1) {
    const auto& prev = coeffs_.back();
    std::vector<double> d(prev.size() - 1);
    for (std::size_t k = 1; k < prev.size(); ++k)
      d[k - 1] = static_cast<double>(k) * prev[k];
    coeffs_.push_back(std::move(d));
  }
}

double PolyBump::deriv(int l, double x) const {
  double t = (x - center_) / halfwidth_;
  if (std::abs(t) >= 1.0) return 0.0;
  if (l >= static_cast<int>(coeffs_.size())) return 0.0;
  const auto& cf = coeffs_[static_cast<std::size_t>(l)];
  double v = 0.0;
  for (std::size_t k = cf.size(); k-- > 0;) v = v * t + cf[k];
  return v * std::pow(halfwidth_, -l);
}

DerivList PolyBump::derivs(int count) const {
  DerivList out;
  for (int l = 0; l < count; ++l)
    out.push_back([*this, l](double x) { return deriv(l, x); });
  return out;
}

// ---------------------------------------------------------------------------
// Helffer-Sjostrand machinery
// ---------------------------------------------------------------------------

double plateau_cutoff(double y, double c0) {
  double a = std::abs(y);
  if (a <= 0.5 * c0) return 1.0;
  if (a >= c0) return 0.0;
  // Smooth monotone transition built from exp(-1/s).
  double t = (a - 0.5 * c0) / (0.5 * c0);  // in (0, 1)
  double h1 = std::exp(-1.0 / (1.0 - t));
  double h0 = std::exp(-1.0 / t);
  return h1 / (h1 + h0);
}

cplx psi_extension(const DerivList& f_derivs, double x, double y, double c0) {
  if (f_derivs.empty()) throw ConfigError("psi_extension: no derivatives");
  double g = plateau_cutoff(y, c0);
  if (g == 0.0) return 0.0;
  const cplx iy(0.0, y);
  cplx term(1.0, 0.0);  // (i y)^l / l!
  cplx sum = 0.0;
  for (std::size_t l = 0; l < f_derivs.size(); ++l) {
    if (l > 0) term *= iy / static_cast<double>(l);
    sum += term * f_derivs[l](x);
  }
  return g * sum;
}

namespace {

// dbar Psi = pi^-1 (d_x + i d_y) Psi by central differences, step 1e-6.
cplx dbar_psi(const DerivList& f, double x, double y, double c0) {
  const double h = 1e-6;
  cplx dx = (psi_extension(f, x + h, y, c0) - psi_extension(f, x - h, y, c0)) /
            (2.0 * h);
  cplx dy = (psi_extension(f, x, y + h, c0) - psi_extension(f, x, y - h, c0)) /
            (2.0 * h);
  return (dx + cplx(0.0, 1.0) * dy) / kPi;
}

// Composite integral of Re[dbar Psi * M] over x in [xa, xb] (Simpson) and
// y in [y_lo, c0]. The y range is split at c0/2: below it g == 1 and the
// integrand decays like y^K, so a geometric grid (trapezoid in log y)
// suffices; above it the cutoff transition g'(y) concentrates most of the
// mass, so that band gets a uniform Simpson rule of its own.
double hs_grid_integral(const DerivList& f, double xa, double xb,
                        const TheoryParams& p, double c0, double y_lo, int nx,
                        int ny) {
  if (nx % 2 == 0) ++nx;  // Simpson needs an even panel count
  if (ny % 2 == 0) ++ny;
  const double hx = (xb - xa) / (nx - 1);
  auto row_integral = [&](double y) {
    double row = 0.0;
    for (int i = 0; i < nx; ++i) {
      double x = xa + hx * i;
      double wx = (i == 0 || i == nx - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      row += wx * (dbar_psi(f, x, y, c0) * M_closed(cplx(x, y), p)).real();
    }
    return row * hx / 3.0;
  };
  double total = 0.0;
  const double y_mid = 0.5 * c0;
  const double lr = std::log(y_mid / y_lo);
  for (int j = 0; j < ny; ++j) {
    double y = y_lo * std::exp(lr * j / (ny - 1));
    double wy = ((j == 0 || j == ny - 1) ? 0.5 : 1.0) * lr / (ny - 1) * y;
    total += wy * row_integral(y);
  }
  const double hy = (c0 - y_mid) / (ny - 1);
  for (int j = 0; j < ny; ++j) {
    double wy = (j == 0 || j == ny - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    total += wy * hy / 3.0 * row_integral(y_mid + hy * j);
  }
  return total;
}

}  // namespace

double hs_functional(const DerivList& f_derivs, double xa, double xb,
                     const TheoryParams& p, const HsQuadSpec& quad) {
  if (!(xa < xb)) throw ConfigError("hs_functional: need xa < xb");
  const int K = static_cast<int>(f_derivs.size()) - 1;
  double prev = 0.0;
  bool have_prev = false;
  int nx = quad.nx, ny = quad.ny;
  for (int ref = 0; ref <= quad.max_refinements; ++ref) {
    double i1 = hs_grid_integral(f_derivs, xa, xb, p, quad.c0, quad.y_min, nx,
                                 ny);
    double i0 = hs_grid_integral(f_derivs, xa, xb, p, quad.c0,
                                 0.5 * quad.y_min, nx, ny);
    // The omitted tail below y_lo scales like y_lo^(K+1); extrapolate it away.
    double val = i0 + (i0 - i1) / (std::pow(2.0, K + 1) - 1.0);
    if (have_prev && std::abs(val - prev) <= quad.rel_tol) return val;
    prev = val;
    have_prev = true;
    nx = 2 * (nx - 1) + 1;
    ny = 2 * ny - 1;
  }
  throw NumericalError("hs_functional: grid refinement did not converge");
}

}  // namespace rmt::theory
