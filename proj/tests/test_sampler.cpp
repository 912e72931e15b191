#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/sampler.hpp"

using namespace rmt;

namespace {

ChainConfig chain_cfg(int n, std::uint64_t seed, long burn = -1) {
  ChainConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.burn_in = burn;
  return cfg;
}

struct PooledMoments {
  double m2, m4, se_m2, se_m4;
};

PooledMoments pooled_moments(const SampleBatch& batch) {
  std::vector<double> m2s, m4s;
  for (const auto& v : batch.vectors) {
    Eigen::ArrayXd sq = v.array().square();
    m2s.push_back(sq.mean());
    m4s.push_back(sq.square().mean());
  }
  auto mean_se = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (xs.size() - 1.0);
    return std::pair{mean, std::sqrt(var / xs.size())};
  };
  auto [m2, se2] = mean_se(m2s);
  auto [m4, se4] = mean_se(m4s);
  return {m2, m4, se2, se4};
}

}  // namespace

TEST_CASE("sample_vector and draw_batch are deterministic in the seed") {
  PotentialParams p = PotentialParams::create(1.0, 1.0, 1.0);
  ChainConfig cfg = chain_cfg(8, 12345, 200);
  Eigen::VectorXd a = sample_vector(p, cfg);
  Eigen::VectorXd b = sample_vector(p, cfg);
  CHECK(a == b);

  SampleBatch b1 = draw_batch(p, 8, 5, cfg, 1);
  SampleBatch b2 = draw_batch(p, 8, 5, cfg, 3);  // thread count must not matter
  CHECK(b1.rescale == b2.rescale);
  for (int i = 0; i < 5; ++i) CHECK(b1.vectors[i] == b2.vectors[i]);
}

TEST_CASE("Gaussian potential chain reproduces unit variance") {
  // a = 0, b = 1/2, c_pot = 0 is the standard normal product law.
  PotentialParams p = PotentialParams::create(0.0, 0.5, 0.0);
  Eigen::VectorXd x = sample_vector(p, chain_cfg(500, 99));
  double var = x.array().square().mean();
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / 500.0));
}

TEST_CASE("decoupled quartic chain matches the 1-D quadrature moments") {
  PotentialParams p = PotentialParams::create(0.0, 1.0, 1.0);
  const int R = 200, n = 50;
  SampleBatch batch;
  batch.vectors.resize(R);
  for (int r = 0; r < R; ++r)
    batch.vectors[r] = sample_vector(p, chain_cfg(n, derive_seed(4242, r)));
  PooledMoments pm = pooled_moments(batch);
  CHECK(std::abs(pm.m2 - moment_1d(1.0, 1.0, 2)) < 3.0 * pm.se_m2);
  CHECK(std::abs(pm.m4 - moment_1d(1.0, 1.0, 4)) < 3.0 * pm.se_m4);
}

TEST_CASE("n = 1 chain passes a Kolmogorov-Smirnov test against quadrature") {
  const double b = 1.0, c = 1.0;
  PotentialParams p = PotentialParams::create(0.0, b, c);
  const int N = 1500;
  std::vector<double> xs(N);
  for (int i = 0; i < N; ++i)
    xs[i] = sample_vector(p, chain_cfg(1, derive_seed(31337, i)))[0];
  std::sort(xs.begin(), xs.end());

  auto weight = [&](double t) { return std::exp(-b * t * t - c * t * t * t * t); };
  const double xmax = quadrature_xmax(b, c);
  const double Z = 2.0 * adaptive_simpson(weight, 0.0, xmax, 1e-12);
  auto cdf = [&](double t) {
    double tail = adaptive_simpson(weight, 0.0, std::min(std::abs(t), xmax),
                                   1e-12) / Z;
    return t >= 0.0 ? 0.5 + tail : 0.5 - tail;
  };
  double ks = 0.0;
  for (int i = 0; i < N; ++i) {
    double F = cdf(xs[i]);
    ks = std::max(ks, std::abs(F - (i + 1.0) / N));
    ks = std::max(ks, std::abs(F - static_cast<double>(i) / N));
  }
  // 1% critical value of the one-sample KS statistic.
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("gaussian_baseline: determinism and classical moments") {
  SampleBatch a = gaussian_baseline(2, 3, 2024);
  SampleBatch b = gaussian_baseline(2, 3, 2024);
  for (int i = 0; i < 3; ++i) CHECK(a.vectors[i] == b.vectors[i]);
  CHECK(a.rescale == 1.0);

  SampleBatch big = gaussian_baseline(50, 2000, 555);
  PooledMoments pm = pooled_moments(big);
  CHECK(std::abs(pm.m4 - 3.0) < 3.0 * pm.se_m4);

  // kappa = n^-1 Var(sum X_i^2) = Var(chi2_1) = 2 for independent entries.
  const int n = 50, R = 2000;
  std::vector<double> T(R);
  for (int r = 0; r < R; ++r) T[r] = big.vectors[r].squaredNorm();
  double mean = 0.0;
  for (double t : T) mean += t;
  mean /= R;
  double var = 0.0, m4c = 0.0;
  for (double t : T) {
    double d = t - mean;
    var += d * d;
    m4c += d * d * d * d;
  }
  var /= (R - 1.0);
  m4c /= R;
  double kappa = var / n;
  double se_kappa = std::sqrt(std::max(m4c - var * var, 0.0) / R) / n;
  CHECK(std::abs(kappa - 2.0) < 3.0 * se_kappa);
}

TEST_CASE("draw_batch enforces the pooled-variance normalization") {
  PotentialParams p = PotentialParams::create(1.0, 1.0, 1.0);
  SampleBatch batch = draw_batch(p, 50, 100, chain_cfg(50, 808), 1);
  PooledMoments pm = pooled_moments(batch);
  CHECK(std::abs(pm.m2 - 1.0) < 3.0 * pm.se_m2 + 0.02);
  CHECK(batch.acceptance_rate > 0.3);
  CHECK(batch.rescale > 0.0);

  SampleBatch single = draw_batch(p, 10, 1, chain_cfg(10, 9), 1);
  CHECK(single.vectors.size() == 1);
}

TEST_CASE("estimate_moments recovers known regimes") {
  ChainConfig cfg = chain_cfg(0, 777);

  // Gaussian product law: mu = 3, kappa = 2.
  PotentialParams gauss = PotentialParams::create(0.0, 0.5, 0.0);
  MomentEstimates g = estimate_moments(gauss, 50, 400, cfg, 1);
  CHECK(std::abs(g.mu_hat - 3.0) < 3.0 * g.se_mu + 0.05);
  CHECK(std::abs(g.kappa_hat - 2.0) < 3.0 * g.se_kappa + 0.05);

  // Decoupled quartic: independence forces kappa = mu - 1 after rescaling.
  PotentialParams quart = PotentialParams::create(0.0, 1.0, 1.0);
  MomentEstimates q = estimate_moments(quart, 50, 400, cfg, 1);
  double gap_se = std::sqrt(q.se_kappa * q.se_kappa + q.se_mu * q.se_mu);
  CHECK(std::abs(q.kappa_hat - (q.mu_hat - 1.0)) < 3.0 * gap_se + 0.05);

  // Coupled potential: the a-term suppresses fluctuations of sum X_i^2.
  PotentialParams coupled = PotentialParams::create(2.0, 1.0, 1.0);
  MomentEstimates c = estimate_moments(coupled, 100, 400, cfg, 1);
  double se = std::sqrt(c.se_kappa * c.se_kappa + c.se_mu * c.se_mu);
  CHECK(c.kappa_hat < c.mu_hat - 1.0 - 3.0 * se);

  CHECK_THROWS_AS(estimate_moments(gauss, 10, 10, cfg, 1), ConfigError);
}

TEST_CASE("empirical joint law is exchangeable") {
  PotentialParams p = PotentialParams::create(1.0, 1.0, 1.0);
  const int n = 10, R = 3000;
  SampleBatch batch = draw_batch(p, n, R, chain_cfg(n, 606, 500), 1);

  // Block estimates of Cov(X_i^2, X_j^2) for two disjoint index pairs.
  auto block_cov = [&](int i, int j, int blocks) {
    std::vector<double> covs;
    int per = R / blocks;
    for (int bl = 0; bl < blocks; ++bl) {
      double mi = 0.0, mj = 0.0, mij = 0.0;
      for (int r = bl * per; r < (bl + 1) * per; ++r) {
        double xi = batch.vectors[r][i] * batch.vectors[r][i];
        double xj = batch.vectors[r][j] * batch.vectors[r][j];
        mi += xi;
        mj += xj;
        mij += xi * xj;
      }
      mi /= per;
      mj /= per;
      mij /= per;
      covs.push_back(mij - mi * mj);
    }
    double mean = 0.0;
    for (double cv : covs) mean += cv;
    mean /= blocks;
    double var = 0.0;
    for (double cv : covs) var += (cv - mean) * (cv - mean);
    var /= (blocks - 1.0);
    return std::pair{mean, std::sqrt(var / blocks)};
  };
  auto [c12, se12] = block_cov(0, 1, 20);
  auto [c37, se37] = block_cov(2, 6, 20);
  double se = std::sqrt(se12 * se12 + se37 * se37);
  CHECK(std::abs(c12 - c37) < 4.0 * se);
}

TEST_CASE("tail of |sum X_i| / sqrt(n) is sub-Gaussian") {
  PotentialParams p = PotentialParams::create(1.0, 1.0, 1.0);
  const int n = 20, R = 600;
  SampleBatch batch = draw_batch(p, n, R, chain_cfg(n, 11011, 600), 1);
  std::vector<double> stats(R);
  for (int r = 0; r < R; ++r)
    stats[r] = std::abs(batch.vectors[r].sum()) / std::sqrt(double(n));
  double prev = 1.0;
  for (double t : {1.0, 1.5, 2.0, 2.5}) {
    double frac = 0.0;
    for (double s : stats) frac += (s > t);
    frac /= R;
    CHECK(frac <= std::exp(-0.3 * t * t));
    CHECK(frac <= prev);
    prev = frac;
  }
}
