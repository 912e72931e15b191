#include <doctest.h>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "rmt/potential.hpp"

using namespace rmt;

namespace {

PotentialParams raw_params(double a, double b, double c_pot, double m_bc) {
  PotentialParams p;
  p.a = a;
  p.b = b;
  p.c_pot = c_pot;
  p.m_bc = m_bc;
  p.sigma_bc = 0.0;
  return p;
}

}  // namespace

TEST_CASE("eval_potential matches hand values and a long-double oracle") {
  Eigen::VectorXd x(2);
  x << 1.0, 1.0;
  CHECK(eval_potential(raw_params(0.0, 0.5, 0.0, 1.0), x) == doctest::Approx(1.0));
  // Centered term vanishes when sum(x^2) = n * m_bc.
  CHECK(eval_potential(raw_params(1.0, 0.5, 0.0, 1.0), x) == doctest::Approx(1.0));

  Eigen::VectorXd y(2);
  y << 0.3, -0.4;
  double got = eval_potential(raw_params(2.0, 1.0, 0.5, 0.8), y);
  double want = oracles::potential_value_ld(2.0, 1.0, 0.5, 0.8, {0.3, -0.4});
  CHECK(got == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("eval_potential rejects non-finite input") {
  Eigen::VectorXd x(2);
  x << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eval_potential(raw_params(0.0, 0.5, 0.0, 1.0), x),
                  ConfigError);
}

TEST_CASE("grad_potential trivial cases") {
  Eigen::VectorXd x(2);
  x << 1.0, -2.0;
  Eigen::VectorXd g = grad_potential(raw_params(0.0, 0.5, 0.0, 1.0), x);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(-2.0));
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK(grad_potential(raw_params(2.0, 1.0, 0.7, 0.5), zero).norm() == 0.0);
}

TEST_CASE("grad_potential matches central finite differences") {
  Rng rng(20240401);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rng.next_u64() % 9);
    PotentialParams p = raw_params(rng.uniform() * 2.0, 0.2 + rng.uniform(),
                                   rng.uniform(), rng.uniform());
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = 2.0 * rng.normal();
    Eigen::VectorXd g = grad_potential(p, x);
    auto f = [&](const Eigen::VectorXd& v) { return eval_potential(p, v); };
    for (int i = 0; i < n; ++i) {
      double fd = oracles::central_diff(f, x, i, 1e-6);
      double scale = std::max(1.0, std::abs(g[i]));
      CHECK(std::abs(g[i] - fd) / scale < 1e-6);
    }
  }
}

TEST_CASE("second differences respect the convexity lower bound") {
  // For a = 0 the Hessian is exactly 2b + 12 c x^2 >= 2b. For a > 0 the
  // coupled term contributes (4a/n) sum(x^2 - m_bc) >= -4 a m_bc along
  // coordinate directions, so the certified bound weakens accordingly.
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rng.next_u64() % 5);
    bool coupled = trial % 2 == 1;
    double a = coupled ? rng.uniform() : 0.0;
    double b = 0.3 + rng.uniform();
    double m_bc = 0.2 + rng.uniform();
    PotentialParams p = raw_params(a, b, rng.uniform(), m_bc);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.normal();
    int dir = static_cast<int>(rng.next_u64() % n);
    const double h = 1e-4;
    Eigen::VectorXd xp = x, xm = x;
    xp[dir] += h;
    xm[dir] -= h;
    double second = (eval_potential(p, xp) - 2.0 * eval_potential(p, x) +
                     eval_potential(p, xm)) /
                    (h * h);
    double bound = coupled ? 2.0 * b - 4.0 * a * m_bc : 2.0 * b;
    CHECK(second >= bound - 1e-6);
  }
}

TEST_CASE("eval_potential is permutation invariant") {
  PotentialParams p = raw_params(1.5, 0.8, 0.3, 0.6);
  Eigen::VectorXd x(4);
  x << 0.3, -1.2, 0.7, 2.1;
  Eigen::VectorXd perm(4);
  perm << 2.1, 0.3, -1.2, 0.7;
  CHECK(eval_potential(p, x) == doctest::Approx(eval_potential(p, perm)));
}

TEST_CASE("moment_1d: Gaussian reference values and odd symmetry") {
  CHECK(moment_1d(0.5, 0.0, 2) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(moment_1d(0.5, 0.0, 4) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(moment_1d(1.0, 0.7, 1) == 0.0);
  CHECK(moment_1d(0.3, 1.3, 7) == 0.0);
}

TEST_CASE("moment_1d agrees with an independent Gauss-Legendre quadrature") {
  for (auto [b, c] : {std::pair{1.0, 1.0}, {0.7, 0.2}, {2.0, 0.0}}) {
    for (int k : {2, 4, 6}) {
      double adaptive = moment_1d(b, c, k);
      double gl = oracles::moment_1d_gl(b, c, k);
      CHECK(adaptive == doctest::Approx(gl).epsilon(1e-9));
    }
  }
}

TEST_CASE("compute_mbc and compute_sigma_bc") {
  CHECK(compute_mbc(0.5, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(compute_mbc(1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(compute_sigma_bc(0.5, 0.0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(compute_sigma_bc(1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-9));
  double m2 = oracles::moment_1d_gl(1.0, 1.0, 2);
  double m4 = oracles::moment_1d_gl(1.0, 1.0, 4);
  CHECK(compute_mbc(1.0, 1.0) == doctest::Approx(m2).epsilon(1e-9));
  CHECK(compute_sigma_bc(1.0, 1.0) ==
        doctest::Approx(m4 - m2 * m2).epsilon(1e-8));
  CHECK(compute_sigma_bc(1.0, 1.0) >= 0.0);
}

TEST_CASE("create validates and fills derived constants") {
  PotentialParams p = PotentialParams::create(1.0, 1.0, 1.0);
  CHECK(p.m_bc == doctest::Approx(compute_mbc(1.0, 1.0)));
  CHECK(p.sigma_bc == doctest::Approx(compute_sigma_bc(1.0, 1.0)));
  CHECK_THROWS_AS(PotentialParams::create(-1.0, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(PotentialParams::create(0.0, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(PotentialParams::create(0.0, 1.0, -0.5), ConfigError);
}

TEST_CASE("JSON round-trip recomputes derived fields") {
  PotentialParams p = PotentialParams::create(0.5, 1.2, 0.3);
  nlohmann::json j = p.to_json();
  // Derived fields are never trusted from the file.
  j["m_bc"] = 123.0;
  PotentialParams q = PotentialParams::from_json(j);
  CHECK(q.m_bc == doctest::Approx(p.m_bc));
  CHECK(q.sigma_bc == doctest::Approx(p.sigma_bc));

  CHECK_THROWS_AS(PotentialParams::from_json(nlohmann::json{{"a", 1.0}}),
                  ConfigError);
  nlohmann::json bad = {{"a", 1.0}, {"b", "one"}, {"c_pot", 0.0}};
  CHECK_THROWS_AS(PotentialParams::from_json(bad), ConfigError);
}
