#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rmt/ensemble.hpp"
#include "rmt/sampler.hpp"
#include "rmt/theory.hpp"

namespace rmt::harness {

enum class Source { kGaussian, kPotential };

/// Shared configuration for the Monte Carlo experiments. The matrix size pair
/// is (n, m) with m = round(c_target * n - sigma_target).
struct ExperimentConfig {
  int n = 100;
  double c_target = 1.0;
  double sigma_target = 0.0;
  int replications = 100;
  std::vector<cplx> z_grid;
  Source source = Source::kGaussian;
  PotentialParams potential;  ///< used only when source == kPotential
  ChainConfig chain;          ///< template; n and seed are set per use
  std::uint64_t master_seed = 1;
  int threads = 1;
  double epsilon = 0.15;           ///< support fattening for outlier counts
  int moment_replications = 400;   ///< vectors used by estimate_moments
  theory::EvalRegion region;

  int m_of(int dim) const;
  int m() const { return m_of(n); }
  void validate() const;
};

/// One grid point of the CLT-mean experiment. M_hat centers the replication
/// mean of s_{n,m}(z) at the closed form evaluated at the empirical ratio
/// m/n; m_hat_limit centers at c_target instead, which makes the sigma term
/// visible. Both are reported.
struct CltRow {
  cplx z;
  cplx m_hat;
  cplx m_hat_limit;
  cplx m_theory;
  double stderr_mc = 0.0;  ///< (n+m) * replication std of s / sqrt(R)
  int replications = 0;
};

struct CltResult {
  std::vector<CltRow> rows;
  double mu_used = 3.0;
  double kappa_used = 2.0;
  double se_mu = 0.0;
  double se_kappa = 0.0;
};

CltResult run_clt_experiment(const ExperimentConfig& cfg);

struct SupportReport {
  long total_outliers = 0;
  std::vector<long> outliers_per_replication;
  bool zero_counts_exact = true;  ///< m-n exact zeros in every replication
  double max_abs_eigenvalue = 0.0;
  double min_positive_eigenvalue = 0.0;
};

/// Counts eigenvalues outside the epsilon-fattened limit support (the two
/// intervals, plus the structural zero atom when m > n).
SupportReport run_support_experiment(const ExperimentConfig& cfg);

struct ResolventReport {
  std::array<int, 2> sizes{};              ///< {n, 2n}
  std::array<double, 2> max_sq_block2{};   ///< mean over reps of max_{i<m}|S_ii - s2|^2
  std::array<double, 2> max_sq_block1{};   ///< mean over reps of max_{i>=m}|S_ii - s1|^2
};

/// Dense-resolvent diagonal statistics at sizes n and 2n. Requires n <= 400.
ResolventReport run_resolvent_diagonal_check(const ExperimentConfig& cfg,
                                             cplx z);

struct ConcentrationReport {
  std::vector<int> sizes;              ///< {50, 100, 200, 400}
  std::vector<double> quad_form_msq;   ///< E|X^T A X - Tr A|^2 per size
  double quad_form_slope = 0.0;        ///< log-log regression slope
  std::vector<double> trace_clip_var;  ///< Var(Tr f(W)) per size, f = soft clip
  double trace_var_slope = 0.0;
  double max_lambda_max = 0.0;         ///< across all replications and sizes
  double lambda_bound = 0.0;           ///< sqrt(c_target) + 1.5
};

/// The 1-Lipschitz soft clip used for the trace-variance scaling check.
/// Offset so that Tr f(W) is not identically zero on the symmetric spectrum.
double soft_clip(double x);

ConcentrationReport run_concentration_suite(const ExperimentConfig& cfg);

struct HsReport {
  double mc_value = 0.0;   ///< mean_r sum_i f(lambda_i) - (n+m) int f dF
  double mc_stderr = 0.0;
  double hs_value = 0.0;   ///< Helffer-Sjostrand reconstruction of the limit
  double f_integral_limit = 0.0;  ///< int f dF (continuous part + zero atom)
};

HsReport run_hs_reconstruction(const ExperimentConfig& cfg,
                               const theory::PolyBump& bump, int K,
                               const theory::HsQuadSpec& quad);

/// int f dF for the limit law at aspect ratio c: trapezoid quadrature of
/// density_F over the bump support plus atom_mass * f(0).
double integral_against_limit(const theory::PolyBump& bump, double c);

/// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x,
                        const std::vector<double>& y);

/// One replication's spectrum under the configured source, at matrix size
/// (dim, m_of(dim)). Deterministic in (cfg, dim, rep).
Spectrum replication_spectrum(const ExperimentConfig& cfg, int dim, int rep);

}  // namespace rmt::harness
