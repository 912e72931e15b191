#include "rmt/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace rmt {

namespace {

using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;

void require_offaxis(cplx z, const char* who) {
  if (z.imag() == 0.0)
    throw ConfigError(std::string(who) + ": Im z must be nonzero");
}

// Unconjugated bilinear form a^T b (the Schur identities use the transpose,
// not the Hermitian adjoint; all vectors here are real-by-construction).
cplx bilinear(const VectorXcd& a, const VectorXcd& b) {
  return (a.array() * b.array()).sum();
}

}  // namespace

DataMatrix build_data_matrix(const SampleBatch& batch) {
  if (batch.vectors.empty()) throw ConfigError("build_data_matrix: empty batch");
  const int n = static_cast<int>(batch.vectors.front().size());
  const int m = static_cast<int>(batch.vectors.size());
  if (m < n)
    throw ConfigError("build_data_matrix: m < n violates the aspect-ratio "
                      "requirement c >= 1");
  DataMatrix Y;
  Y.n = n;
  Y.m = m;
  Y.entries.resize(n, m);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int p = 0; p < m; ++p) {
    if (batch.vectors[static_cast<std::size_t>(p)].size() != n)
      throw ConfigError("build_data_matrix: ragged batch");
    Y.entries.col(p) =
        inv_sqrt_n * batch.vectors[static_cast<std::size_t>(p)];
  }
  if (!Y.entries.allFinite())
    throw ConfigError("build_data_matrix: non-finite entries");
  return Y;
}

Spectrum spectrum_of(const DataMatrix& Y) {
  if (Y.entries.rows() != Y.n || Y.entries.cols() != Y.m || Y.m < Y.n)
    throw ConfigError("spectrum_of: invalid data matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Y.entries);
  if (svd.info() != Eigen::Success)
    throw NumericalError("spectrum_of: SVD failed");
  Spectrum s;
  s.n = Y.n;
  s.m = Y.m;
  s.singular_values = svd.singularValues();  // Eigen sorts descending
  return s;
}

std::vector<double> eigenvalues_W(const Spectrum& s) {
  const int n = s.n, m = s.m;
  std::vector<double> eigs;
  eigs.reserve(static_cast<std::size_t>(n + m));
  for (int i = 0; i < n; ++i) eigs.push_back(-s.singular_values[i]);
  for (int i = 0; i < m - n; ++i) eigs.push_back(0.0);
  for (int i = n - 1; i >= 0; --i) eigs.push_back(s.singular_values[i]);
  return eigs;  // ascending by construction
}

cplx empirical_stieltjes(std::span<const double> eigs, cplx z) {
  require_offaxis(z, "empirical_stieltjes");
  cplx sum = 0.0;
  for (double lam : eigs) sum += 1.0 / (lam - z);
  return sum / static_cast<double>(eigs.size());
}

std::pair<cplx, cplx> block_stieltjes(const Spectrum& s, cplx z) {
  require_offaxis(z, "block_stieltjes");
  cplx core = 0.0;  // sum over singular values of z/(sigma^2 - z^2)
  for (int i = 0; i < s.n; ++i) {
    double sv = s.singular_values[i];
    core += z / (sv * sv - z * z);
  }
  cplx s1 = core / static_cast<double>(s.n);
  cplx s2 = (core + static_cast<double>(s.m - s.n) * (-1.0 / z)) /
            static_cast<double>(s.m);
  return {s1, s2};
}

Eigen::MatrixXd assemble_W(const DataMatrix& Y) {
  const int n = Y.n, m = Y.m;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n + m, n + m);
  W.topRightCorner(m, n) = Y.entries.transpose();
  W.bottomLeftCorner(n, m) = Y.entries;
  return W;
}

cplx resolvent_trace_schur(const Eigen::Ref<const Eigen::MatrixXd>& A,
                           cplx z) {
  const auto dim = A.rows();
  if (dim > 64)
    throw ConfigError("resolvent_trace_schur: oracle limited to dim <= 64");
  if (A.cols() != dim) throw ConfigError("resolvent_trace_schur: not square");
  MatrixXcd B = A.cast<cplx>();
  B.diagonal().array() -= z;
  cplx trace = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    // Minor with row/column k removed, and the k-th column with entry k
    // removed.
    MatrixXcd Bk(dim - 1, dim - 1);
    VectorXcd alpha(dim - 1);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i == k) continue;
      alpha[r] = B(i, k);
      Eigen::Index c = 0;
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (j == k) continue;
        Bk(r, c++) = B(i, j);
      }
      ++r;
    }
    Eigen::FullPivLU<MatrixXcd> lu(Bk);
    if (!lu.isInvertible())
      throw NumericalError("resolvent_trace_schur: singular principal minor");
    VectorXcd w = lu.solve(alpha);
    cplx denom = B(k, k) - bilinear(alpha, w);
    if (denom == cplx(0.0))
      throw NumericalError("resolvent_trace_schur: zero Schur complement");
    trace += 1.0 / denom;
  }
  return trace;
}

cplx schur_rank_one_diff(const Eigen::Ref<const Eigen::MatrixXd>& A, int k,
                         cplx z) {
  const auto dim = A.rows();
  if (dim > 64 || A.cols() != dim || k < 0 || k >= dim)
    throw ConfigError("schur_rank_one_diff: invalid input");
  MatrixXcd B = A.cast<cplx>();
  B.diagonal().array() -= z;

  MatrixXcd Bk(dim - 1, dim - 1);
  VectorXcd alpha(dim - 1);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i == k) continue;
    alpha[r] = B(i, k);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (j == k) continue;
      Bk(r, c++) = B(i, j);
    }
    ++r;
  }
  Eigen::FullPivLU<MatrixXcd> lu_full(B);
  Eigen::FullPivLU<MatrixXcd> lu_minor(Bk);
  if (!lu_full.isInvertible() || !lu_minor.isInvertible())
    throw NumericalError("schur_rank_one_diff: singular matrix or minor");
  cplx lhs = lu_full.inverse().trace() - lu_minor.inverse().trace();
  VectorXcd w1 = lu_minor.solve(alpha);
  VectorXcd w2 = lu_minor.solve(w1);
  cplx rhs = (1.0 + bilinear(alpha, w2)) / (B(k, k) - bilinear(alpha, w1));
  return lhs - rhs;
}

}  // namespace rmt
