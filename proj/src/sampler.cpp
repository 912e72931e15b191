#include "rmt/sampler.hpp"

#include <cmath>

namespace rmt {

namespace {

// Seed-derivation tags; part of the determinism contract.
constexpr std::uint64_t kTagCopy = 0x636f7079ULL;    // "copy"
constexpr std::uint64_t kTagPilot = 0x70696c6fULL;   // "pilo"
constexpr std::uint64_t kTagGauss = 0x67617573ULL;   // "gaus"
constexpr std::uint64_t kTagMoment = 0x6d6f6d74ULL;  // "momt"

double potential_value(const PotentialParams& p, const Eigen::ArrayXd& x,
                       int n) {
  Eigen::ArrayXd sq = x.square();
  double s2 = sq.sum();
  double centered = s2 - n * p.m_bc;
  return p.a / n * centered * centered + p.b * s2 +
         p.c_pot * sq.square().sum();
}

void potential_grad(const PotentialParams& p, const Eigen::ArrayXd& x, int n,
                    Eigen::ArrayXd& out) {
  Eigen::ArrayXd sq = x.square();
  double centered = sq.sum() - n * p.m_bc;
  out = (4.0 * p.a / n * centered + 2.0 * p.b) * x + 4.0 * p.c_pot * x * sq;
}

class MalaChain {
 public:
  MalaChain(const PotentialParams& p, int n, double step, std::uint64_t seed)
      : params_(p), n_(n), h_(step), rng_(seed), x_(n), grad_(n), tmp_(n) {
    warm_start();
    v_ = potential_value(params_, x_, n_);
    potential_grad(params_, x_, n_, grad_);
  }

  // One MALA step; returns whether the proposal was accepted.
  bool step() {
    const double h2 = h_ * h_;
    for (int i = 0; i < n_; ++i) tmp_[i] = rng_.normal();
    Eigen::ArrayXd xp = x_ - 0.5 * h2 * grad_ + h_ * tmp_;
    double vp = potential_value(params_, xp, n_);
    Eigen::ArrayXd gp(n_);
    potential_grad(params_, xp, n_, gp);
    // log q(y|x) = -|y - x + (h^2/2) grad V(x)|^2 / (2 h^2)
    double fwd = (xp - x_ + 0.5 * h2 * grad_).square().sum();
    double bwd = (x_ - xp + 0.5 * h2 * gp).square().sum();
    double log_alpha = v_ - vp + (fwd - bwd) / (2.0 * h2);
    if (std::log(rng_.uniform()) < log_alpha) {
      x_.swap(xp);
      grad_.swap(gp);
      v_ = vp;
      return true;
    }
    return false;
  }

  // Halve the step size until a 200-step probe accepts at least 40% of
  // proposals. Halving only raises the acceptance rate for a log-concave
  // target, so rates above 0.8 at the default step are left alone.
  void tune() {
    const int probe = 200;
    for (int halvings = 0; halvings < 30; ++halvings) {
      int acc = 0;
      for (int s = 0; s < probe; ++s) acc += step();
      if (acc >= static_cast<int>(0.4 * probe)) return;
      h_ *= 0.5;
    }
  }

  // Runs burn-in and reports the acceptance rate over it.
  double burn(long steps) {
    if (steps <= 0) return 1.0;
    long acc = 0;
    for (long s = 0; s < steps; ++s) acc += step();
    double rate = static_cast<double>(acc) / static_cast<double>(steps);
    if (rate < 0.01)
      throw TuningError("MALA acceptance below 1% over burn-in");
    return rate;
  }

  const Eigen::ArrayXd& state() const { return x_; }

 private:
  // Initial point from the decoupled a = 0 reference law: per-coordinate
  // rejection sampling of exp(-b x^2 - c x^4) with a N(0, 1/(2b)) proposal.
  void warm_start() {
    const double sd = 1.0 / std::sqrt(2.0 * params_.b);
    for (int i = 0; i < n_; ++i) {
      for (;;) {
        double cand = sd * rng_.normal();
        double c4 = params_.c_pot * cand * cand * cand * cand;
        if (std::log(rng_.uniform()) < -c4) {
          x_[i] = cand;
          break;
        }
      }
    }
  }

  PotentialParams params_;
  int n_;
  double h_;
  Rng rng_;
  Eigen::ArrayXd x_, grad_, tmp_;
  double v_ = 0.0;
};

struct Draw {
  Eigen::VectorXd x;
  double acceptance;
};

Draw draw_one(const PotentialParams& params, const ChainConfig& cfg,
              std::uint64_t seed) {
  MalaChain chain(params, cfg.n, cfg.effective_step(), seed);
  chain.tune();
  double rate = chain.burn(cfg.effective_burn_in());
  return {chain.state().matrix(), rate};
}

}  // namespace

void ChainConfig::validate() const {
  if (n < 1) throw ConfigError("ChainConfig: n must be >= 1");
  if (step_size < 0.0) throw ConfigError("ChainConfig: step_size must be > 0");
  if (thin < 1) throw ConfigError("ChainConfig: thin must be >= 1");
}

double ChainConfig::effective_step() const {
  return step_size > 0.0 ? step_size : 1.6 / std::sqrt(static_cast<double>(n));
}

long ChainConfig::effective_burn_in() const {
  return burn_in >= 0 ? burn_in : 50L * n;
}

Eigen::VectorXd sample_vector(const PotentialParams& params,
                              const ChainConfig& cfg) {
  cfg.validate();
  return draw_one(params, cfg, derive_seed(cfg.seed, 0, kTagCopy)).x;
}

SampleBatch draw_batch(const PotentialParams& params, int n, int m,
                       const ChainConfig& cfg, int threads) {
  if (n < 1 || m < 1) throw ConfigError("draw_batch: need n >= 1 and m >= 1");
  ChainConfig cc = cfg;
  cc.n = n;
  cc.validate();

  // Pilot estimate of E[X_i^2] from >= 10^4 coordinate samples on separate
  // chains, so the batch itself stays unbiased.
  const int pilot_vectors = static_cast<int>((10000 + n - 1) / n);
  double sumsq = 0.0;
  std::vector<double> pilot_sums(static_cast<std::size_t>(pilot_vectors));
  parallel_for(pilot_vectors, threads, [&](int i) {
    Draw d = draw_one(params, cc,
                      derive_seed(cc.seed, static_cast<std::uint64_t>(i),
                                  kTagPilot));
    pilot_sums[static_cast<std::size_t>(i)] = d.x.squaredNorm();
  });
  for (double s : pilot_sums) sumsq += s;
  double mean_sq = sumsq / (static_cast<double>(pilot_vectors) * n);
  double rescale = 1.0 / std::sqrt(mean_sq);

  SampleBatch batch;
  batch.vectors.resize(static_cast<std::size_t>(m));
  batch.rescale = rescale;
  batch.config = cc;
  std::vector<double> rates(static_cast<std::size_t>(m));
  parallel_for(m, threads, [&](int p) {
    Draw d = draw_one(params, cc,
                      derive_seed(cc.seed, static_cast<std::uint64_t>(p),
                                  kTagCopy));
    batch.vectors[static_cast<std::size_t>(p)] = rescale * d.x;
    rates[static_cast<std::size_t>(p)] = d.acceptance;
  });
  double acc = 0.0;
  for (double r : rates) acc += r;
  batch.acceptance_rate = acc / m;
  return batch;
}

SampleBatch gaussian_baseline(int n, int m, std::uint64_t seed) {
  if (n < 1 || m < 1)
    throw ConfigError("gaussian_baseline: need n >= 1 and m >= 1");
  SampleBatch batch;
  batch.rescale = 1.0;
  batch.config.n = n;
  batch.config.seed = seed;
  batch.acceptance_rate = 1.0;
  batch.vectors.resize(static_cast<std::size_t>(m));
  for (int p = 0; p < m; ++p) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(p), kTagGauss));
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    batch.vectors[static_cast<std::size_t>(p)] = std::move(v);
  }
  return batch;
}

MomentEstimates estimate_moments(const PotentialParams& params, int n,
                                 int replications, const ChainConfig& cfg,
                                 int threads) {
  if (replications < 30)
    throw ConfigError("estimate_moments: replications must be >= 30");
  ChainConfig cc = cfg;
  cc.n = n;
  cc.seed = derive_seed(cfg.seed, 0, kTagMoment);
  SampleBatch batch = draw_batch(params, n, replications, cc, threads);

  const int R = replications;
  std::vector<double> m4(static_cast<std::size_t>(R)),
      T(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) {
    const Eigen::ArrayXd sq =
        batch.vectors[static_cast<std::size_t>(r)].array().square();
    m4[static_cast<std::size_t>(r)] = sq.square().mean();
    T[static_cast<std::size_t>(r)] = sq.sum();
  }

  auto mean_of = [R](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / R;
  };
  double mu_hat = mean_of(m4);
  double var_m4 = 0.0;
  for (double x : m4) var_m4 += (x - mu_hat) * (x - mu_hat);
  var_m4 /= (R - 1);

  double T_mean = mean_of(T);
  double T_var = 0.0, T_m4 = 0.0;
  for (double x : T) {
    double d = x - T_mean;
    T_var += d * d;
    T_m4 += d * d * d * d;
  }
  T_var /= (R - 1);
  T_m4 /= R;

  MomentEstimates est;
  est.mu_hat = mu_hat;
  est.se_mu = std::sqrt(var_m4 / R);
  est.kappa_hat = T_var / n;
  // Delta-method standard error of a sample variance.
  double var_of_var = (T_m4 - T_var * T_var) / R;
  est.se_kappa = std::sqrt(std::max(var_of_var, 0.0)) / n;
  return est;
}

}  // namespace rmt
