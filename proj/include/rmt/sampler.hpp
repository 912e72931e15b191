#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "rmt/potential.hpp"

namespace rmt {

/// Settings for one Metropolis-adjusted Langevin chain.
struct ChainConfig {
  int n = 1;               ///< vector dimension
  double step_size = 0.0;  ///< Langevin proposal scale; 0 = auto (1.6/sqrt(n))
  long burn_in = -1;       ///< discarded steps; -1 = auto (50 n)
  int thin = 1;            ///< steps between retained vectors
  std::uint64_t seed = 0;

  void validate() const;
  double effective_step() const;
  long effective_burn_in() const;
};

/// m independent draws of the n-dimensional vector, already rescaled to unit
/// per-coordinate variance. Each draw comes from its own chain; the rescale
/// factor comes from a separate pilot run so the batch stays unbiased.
struct SampleBatch {
  std::vector<Eigen::VectorXd> vectors;
  double rescale = 1.0;
  ChainConfig config;
  double acceptance_rate = 1.0;
};

/// Estimates of the moment parameters entering the limit formulas.
struct MomentEstimates {
  double mu_hat = 0.0;     ///< pooled E[X_i^4] on rescaled coordinates
  double kappa_hat = 0.0;  ///< n^-1 Var(sum X_i^2) across replications
  double se_mu = 0.0;
  double se_kappa = 0.0;
};

/// One draw of X ~ exp(-V) after burn-in MALA steps. Deterministic given the
/// seed. Throws TuningError if the acceptance rate over burn-in stays below
/// 1% after automatic step halving. Not rescaled.
Eigen::VectorXd sample_vector(const PotentialParams& params,
                              const ChainConfig& cfg);

/// m independent vectors (fresh chain per copy, seed derived from cfg.seed
/// and the copy index), rescaled by a pilot estimate of E[X_i^2]^-1/2 built
/// from at least 10^4 coordinate samples.
SampleBatch draw_batch(const PotentialParams& params, int n, int m,
                       const ChainConfig& cfg, int threads = 1);

/// i.i.d. standard normal entries; rescale = 1. The classical
/// Marchenko-Pastur reference (mu = 3, kappa = 2).
SampleBatch gaussian_baseline(int n, int m, std::uint64_t seed);

/// Estimates (mu, kappa) with standard errors from `replications` independent
/// rescaled vectors. Requires replications >= 30.
MomentEstimates estimate_moments(const PotentialParams& params, int n,
                                 int replications, const ChainConfig& cfg,
                                 int threads = 1);

}  // namespace rmt
