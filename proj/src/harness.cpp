#include "rmt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace rmt::harness {

namespace {

// Seed-derivation tags for the experiment layer; disjoint from the sampler's
// own tags so replication streams never collide with chain-internal streams.
constexpr std::uint64_t kTagRep = 0x72657073ULL;    // "reps"
constexpr std::uint64_t kTagQuadA = 0x716d6174ULL;  // "qmat"
constexpr std::uint64_t kTagQuadX = 0x71666f72ULL;  // "qfor"

std::uint64_t size_rep_index(int dim, int rep) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(dim)) << 32) |
         static_cast<std::uint32_t>(rep);
}

SampleBatch replication_batch(const ExperimentConfig& cfg, int dim, int rep) {
  const int m = cfg.m_of(dim);
  const std::uint64_t seed =
      derive_seed(cfg.master_seed, size_rep_index(dim, rep), kTagRep);
  if (cfg.source == Source::kGaussian) return gaussian_baseline(dim, m, seed);
  ChainConfig cc = cfg.chain;
  cc.n = dim;
  cc.seed = seed;
  // Replication-level parallelism lives in the caller; chains stay serial.
  return draw_batch(cfg.potential, dim, m, cc, 1);
}

double sample_variance(const std::vector<double>& v) {
  const double R = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= R;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / (R - 1.0);
}

}  // namespace

int ExperimentConfig::m_of(int dim) const {
  return static_cast<int>(std::lround(c_target * dim - sigma_target));
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("ExperimentConfig: n must be >= 1");
  if (c_target < 1.0)
    throw ConfigError(
        "ExperimentConfig: c_target must be >= 1 (aspect ratio hypothesis)");
  if (m() < n)
    throw ConfigError("ExperimentConfig: m = round(c_target n - sigma_target) "
                      "must be >= n");
  if (replications < 2)
    throw ConfigError("ExperimentConfig: replications must be >= 2");
  if (threads < 1) throw ConfigError("ExperimentConfig: threads must be >= 1");
  if (epsilon < 0.0) throw ConfigError("ExperimentConfig: epsilon must be >= 0");
  for (cplx z : z_grid)
    if (!region.contains(z))
      throw ConfigError("ExperimentConfig: grid point outside the evaluation "
                        "region {|Im z| >= v0, |z| < R}");
  chain.validate();
}

Spectrum replication_spectrum(const ExperimentConfig& cfg, int dim, int rep) {
  return spectrum_of(build_data_matrix(replication_batch(cfg, dim, rep)));
}

CltResult run_clt_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.z_grid.empty())
    throw ConfigError("run_clt_experiment: empty z grid");
  const int n = cfg.n, m = cfg.m();
  const int R = cfg.replications;
  const std::size_t nz = cfg.z_grid.size();

  CltResult result;
  if (cfg.source == Source::kGaussian) {
    result.mu_used = 3.0;
    result.kappa_used = 2.0;
  } else {
    ChainConfig cc = cfg.chain;
    cc.seed = cfg.master_seed;
    MomentEstimates est = estimate_moments(cfg.potential, n,
                                           cfg.moment_replications, cc,
                                           cfg.threads);
    result.mu_used = est.mu_hat;
    result.kappa_used = est.kappa_hat;
    result.se_mu = est.se_mu;
    result.se_kappa = est.se_kappa;
  }

  // Slot-per-replication storage keeps the reduction order independent of the
  // thread schedule.
  std::vector<std::vector<cplx>> per_rep(static_cast<std::size_t>(R));
  parallel_for(R, cfg.threads, [&](int r) {
    Spectrum sp = replication_spectrum(cfg, n, r);
    std::vector<cplx> vals(nz);
    for (std::size_t k = 0; k < nz; ++k) {
      auto [s1, s2] = block_stieltjes(sp, cfg.z_grid[k]);
      vals[k] = (static_cast<double>(n) * s1 + static_cast<double>(m) * s2) /
                static_cast<double>(n + m);
    }
    per_rep[static_cast<std::size_t>(r)] = std::move(vals);
  });

  const double c_emp = static_cast<double>(m) / n;
  theory::TheoryParams limit{cfg.c_target, cfg.sigma_target, result.mu_used,
                             result.kappa_used};
  for (std::size_t k = 0; k < nz; ++k) {
    const cplx z = cfg.z_grid[k];
    cplx mean = 0.0;
    for (int r = 0; r < R; ++r) mean += per_rep[static_cast<std::size_t>(r)][k];
    mean /= static_cast<double>(R);
    double var = 0.0;
    for (int r = 0; r < R; ++r) {
      cplx d = per_rep[static_cast<std::size_t>(r)][k] - mean;
      var += std::norm(d);
    }
    var /= (R - 1.0);

    CltRow row;
    row.z = z;
    row.m_hat = static_cast<double>(n + m) *
                (mean - theory::s_closed(z, c_emp));
    row.m_hat_limit = static_cast<double>(n + m) *
                      (mean - theory::s_closed(z, cfg.c_target));
    row.m_theory = theory::M_closed(z, limit);
    row.stderr_mc = static_cast<double>(n + m) * std::sqrt(var) /
                    std::sqrt(static_cast<double>(R));
    row.replications = R;
    result.rows.push_back(row);
  }
  return result;
}

SupportReport run_support_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.n, m = cfg.m();
  const int R = cfg.replications;
  const auto support = theory::mp_support(cfg.c_target);
  const double eps = cfg.epsilon;

  struct RepStats {
    long outliers = 0;
    bool zeros_exact = true;
    double max_abs = 0.0;
    double min_pos = std::numeric_limits<double>::infinity();
  };
  std::vector<RepStats> stats(static_cast<std::size_t>(R));
  parallel_for(R, cfg.threads, [&](int r) {
    Spectrum sp = replication_spectrum(cfg, n, r);
    auto eigs = eigenvalues_W(sp);
    RepStats st;
    long zeros = 0;
    for (double lam : eigs) {
      if (lam == 0.0) {
        // Structural zeros are appended exactly; anything else at 0 would be
        // a genuine (measure-zero) singular value and count as spectrum.
        ++zeros;
        continue;
      }
      st.max_abs = std::max(st.max_abs, std::abs(lam));
      if (lam > 0.0) st.min_pos = std::min(st.min_pos, lam);
      const bool in_neg = lam >= support.negative_interval[0] - eps &&
                          lam <= support.negative_interval[1] + eps;
      const bool in_pos = lam >= support.positive_interval[0] - eps &&
                          lam <= support.positive_interval[1] + eps;
      if (!in_neg && !in_pos) ++st.outliers;
    }
    st.zeros_exact = (zeros == m - n);
    stats[static_cast<std::size_t>(r)] = st;
  });

  SupportReport report;
  report.min_positive_eigenvalue = std::numeric_limits<double>::infinity();
  for (const RepStats& st : stats) {
    report.total_outliers += st.outliers;
    report.outliers_per_replication.push_back(st.outliers);
    report.zero_counts_exact = report.zero_counts_exact && st.zeros_exact;
    report.max_abs_eigenvalue = std::max(report.max_abs_eigenvalue, st.max_abs);
    report.min_positive_eigenvalue =
        std::min(report.min_positive_eigenvalue, st.min_pos);
  }
  return report;
}

ResolventReport run_resolvent_diagonal_check(const ExperimentConfig& cfg,
                                             cplx z) {
  cfg.validate();
  if (cfg.n > 400)
    throw ConfigError("run_resolvent_diagonal_check: dense inversion capped "
                      "at n <= 400");
  if (z.imag() == 0.0)
    throw ConfigError("run_resolvent_diagonal_check: Im z must be nonzero");

  ResolventReport report;
  for (int which = 0; which < 2; ++which) {
    const int dim = cfg.n * (which + 1);
    const int m = cfg.m_of(dim);
    const double c_emp = static_cast<double>(m) / dim;
    const cplx s1_ref = theory::s1_closed(z, c_emp);
    const cplx s2_ref = theory::s2_closed(z, c_emp);
    const int R = cfg.replications;

    std::vector<std::array<double, 2>> per_rep(static_cast<std::size_t>(R));
    parallel_for(R, cfg.threads, [&](int r) {
      SampleBatch batch = replication_batch(cfg, dim, r);
      Eigen::MatrixXd W = assemble_W(build_data_matrix(batch));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
      if (es.info() != Eigen::Success)
        throw NumericalError("resolvent check: eigendecomposition failed");
      const Eigen::MatrixXd& V = es.eigenvectors();
      const Eigen::VectorXd& lam = es.eigenvalues();
      const int total = dim + m;
      Eigen::VectorXcd w(total);
      for (int k = 0; k < total; ++k) w[k] = 1.0 / (cplx(lam[k]) - z);
      double max2 = 0.0, max1 = 0.0;  // blocks: [0, m) then [m, m + dim)
      for (int i = 0; i < total; ++i) {
        cplx sii = 0.0;
        for (int k = 0; k < total; ++k) sii += V(i, k) * V(i, k) * w[k];
        if (i < m)
          max2 = std::max(max2, std::norm(sii - s2_ref));
        else
          max1 = std::max(max1, std::norm(sii - s1_ref));
      }
      per_rep[static_cast<std::size_t>(r)] = {max2, max1};
    });

    double mean2 = 0.0, mean1 = 0.0;
    for (const auto& p : per_rep) {
      mean2 += p[0];
      mean1 += p[1];
    }
    report.sizes[static_cast<std::size_t>(which)] = dim;
    report.max_sq_block2[static_cast<std::size_t>(which)] = mean2 / R;
    report.max_sq_block1[static_cast<std::size_t>(which)] = mean1 / R;
  }
  return report;
}

double soft_clip(double x) { return std::tanh(x - 0.5); }

double regression_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("regression_slope: need matched samples, >= 2 points");
  const double N = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= N;
  my /= N;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ConfigError("regression_slope: degenerate abscissae");
  return sxy / sxx;
}

ConcentrationReport run_concentration_suite(const ExperimentConfig& cfg) {
  cfg.validate();
  ConcentrationReport report;
  report.sizes = {50, 100, 200, 400};
  report.lambda_bound = std::sqrt(cfg.c_target) + 1.5;
  const int R = cfg.replications;

  // (i) Quadratic-form concentration: E|X^T A X - Tr A|^2 against n for a
  // fixed random symmetric A with unit spectral norm per size.
  for (std::size_t si = 0; si < report.sizes.size(); ++si) {
    const int dim = report.sizes[si];
    Eigen::MatrixXd A(dim, dim);
    Rng rng(derive_seed(cfg.master_seed, si, kTagQuadA));
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        double g = rng.normal();
        A(i, j) = g;
        A(j, i) = g;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A,
                                                      Eigen::EigenvaluesOnly);
    const double norm = std::max(std::abs(es.eigenvalues().minCoeff()),
                                 std::abs(es.eigenvalues().maxCoeff()));
    A /= norm;
    const double trace = A.trace();

    std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(R));
    if (cfg.source == Source::kGaussian) {
      parallel_for(R, cfg.threads, [&](int r) {
        Rng rr(derive_seed(cfg.master_seed, size_rep_index(dim, r), kTagQuadX));
        Eigen::VectorXd x(dim);
        for (int i = 0; i < dim; ++i) x[i] = rr.normal();
        xs[static_cast<std::size_t>(r)] = std::move(x);
      });
    } else {
      ChainConfig cc = cfg.chain;
      cc.n = dim;
      cc.seed = derive_seed(cfg.master_seed, si, kTagQuadX);
      SampleBatch batch = draw_batch(cfg.potential, dim, R, cc, cfg.threads);
      for (int r = 0; r < R; ++r)
        xs[static_cast<std::size_t>(r)] =
            batch.vectors[static_cast<std::size_t>(r)];
    }
    double msq = 0.0;
    for (int r = 0; r < R; ++r) {
      const Eigen::VectorXd& x = xs[static_cast<std::size_t>(r)];
      double d = x.dot(A * x) - trace;
      msq += d * d;
    }
    report.quad_form_msq.push_back(msq / R);
  }

  // (ii) Trace-variance scaling for the 1-Lipschitz soft clip, plus the
  // extreme-eigenvalue bound (iii) over the same spectra.
  double max_lambda = 0.0;
  for (int dim : report.sizes) {
    std::vector<double> traces(static_cast<std::size_t>(R));
    std::vector<double> tops(static_cast<std::size_t>(R));
    parallel_for(R, cfg.threads, [&](int r) {
      Spectrum sp = replication_spectrum(cfg, dim, r);
      auto eigs = eigenvalues_W(sp);
      double t = 0.0;
      for (double lam : eigs) t += soft_clip(lam);
      traces[static_cast<std::size_t>(r)] = t;
      tops[static_cast<std::size_t>(r)] = sp.singular_values[0];
    });
    report.trace_clip_var.push_back(sample_variance(traces));
    for (double t : tops) max_lambda = std::max(max_lambda, t);
  }
  report.max_lambda_max = max_lambda;

  std::vector<double> logn, logq, logv;
  for (std::size_t i = 0; i < report.sizes.size(); ++i) {
    logn.push_back(std::log(static_cast<double>(report.sizes[i])));
    logq.push_back(std::log(report.quad_form_msq[i]));
    logv.push_back(std::log(report.trace_clip_var[i]));
  }
  report.quad_form_slope = regression_slope(logn, logq);
  report.trace_var_slope = regression_slope(logn, logv);
  return report;
}

double integral_against_limit(const theory::PolyBump& bump, double c) {
  const auto support = theory::mp_support(c);
  const double eps = 1e-6;
  const int N = 20000;  // trapezoid panels over the bump support
  const double a = bump.lower(), b = bump.upper();
  const double h = (b - a) / N;
  double acc = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double x = a + h * i;
    if (x == 0.0) continue;  // atom handled exactly below
    const double w = (i == 0 || i == N) ? 0.5 : 1.0;
    acc += w * bump(x) * theory::density_F(x, c, eps);
  }
  return acc * h + support.atom_at_zero_mass * bump(0.0);
}

HsReport run_hs_reconstruction(const ExperimentConfig& cfg,
                               const theory::PolyBump& bump, int K,
                               const theory::HsQuadSpec& quad) {
  cfg.validate();
  if (K < 1 || K > bump.smoothness())
    throw ConfigError("run_hs_reconstruction: K must be within the bump's "
                      "smoothness class");
  const int n = cfg.n, m = cfg.m();
  const int R = cfg.replications;

  std::vector<double> per_rep(static_cast<std::size_t>(R));
  parallel_for(R, cfg.threads, [&](int r) {
    Spectrum sp = replication_spectrum(cfg, n, r);
    auto eigs = eigenvalues_W(sp);
    double t = 0.0;
    for (double lam : eigs) t += bump(lam);
    per_rep[static_cast<std::size_t>(r)] = t;
  });
  double mean = 0.0;
  for (double t : per_rep) mean += t;
  mean /= R;
  const double var = sample_variance(per_rep);

  HsReport report;
  report.f_integral_limit = integral_against_limit(bump, cfg.c_target);
  report.mc_value =
      mean - static_cast<double>(n + m) * report.f_integral_limit;
  report.mc_stderr = std::sqrt(var / R);

  theory::TheoryParams p{cfg.c_target, cfg.sigma_target, 3.0, 2.0};
  if (cfg.source == Source::kPotential) {
    ChainConfig cc = cfg.chain;
    cc.seed = cfg.master_seed;
    MomentEstimates est = estimate_moments(cfg.potential, n,
                                           cfg.moment_replications, cc,
                                           cfg.threads);
    p.mu = est.mu_hat;
    p.kappa = est.kappa_hat;
  }
  report.hs_value = theory::hs_functional(bump.derivs(K + 1),
                                          bump.lower() - 0.05,
                                          bump.upper() + 0.05, p, quad);
  return report;
}

}  // namespace rmt::harness
