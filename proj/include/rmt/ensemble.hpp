#pragma once

#include <Eigen/Core>
#include <span>
#include <utility>
#include <vector>

#include "rmt/sampler.hpp"

namespace rmt {

/// n x m matrix whose column p is X_p / sqrt(n). Requires m >= n.
struct DataMatrix {
  Eigen::MatrixXd entries;
  int n = 0;
  int m = 0;
};

/// Singular values of Y, sorted descending. The symmetric block matrix
/// W = [[0, Y*], [Y, 0]] has eigenvalues {+sigma_i} u {-sigma_i} u
/// {0 with multiplicity m - n}; the zeros are structural and appended
/// exactly, never computed.
struct Spectrum {
  Eigen::VectorXd singular_values;
  int n = 0;
  int m = 0;
};

DataMatrix build_data_matrix(const SampleBatch& batch);

/// Singular values of Y via SVD of the n x m matrix (never by diagonalizing
/// the (n+m) x (n+m) matrix W).
Spectrum spectrum_of(const DataMatrix& Y);

/// All n + m eigenvalues of W, sorted ascending.
std::vector<double> eigenvalues_W(const Spectrum& s);

/// (1/len) sum_i 1/(lambda_i - z). Requires Im z != 0.
cplx empirical_stieltjes(std::span<const double> eigs, cplx z);

/// Block Stieltjes transforms from the singular values:
///   s1 = (1/n) sum_i z/(sigma_i^2 - z^2)
///   s2 = (1/m) [ sum_i z/(sigma_i^2 - z^2) + (m - n)(-1/z) ]
std::pair<cplx, cplx> block_stieltjes(const Spectrum& s, cplx z);

/// Tr((A - z)^-1) via the Schur-complement sum over principal minors.
/// Test-oracle scale only: dimension <= 64. Throws NumericalError on a
/// singular minor.
cplx resolvent_trace_schur(const Eigen::Ref<const Eigen::MatrixXd>& A, cplx z);

/// Difference of the two sides of the rank-one trace identity
///   Tr(B^-1) - Tr(B_k^-1) = (1 + a_k* B_k^-2 a_k)/(b_kk - a_k* B_k^-1 a_k)
/// evaluated on B = A - z; must be ~0 for any symmetric A.
cplx schur_rank_one_diff(const Eigen::Ref<const Eigen::MatrixXd>& A, int k,
                         cplx z);

/// Full W from a data matrix, ordered so that indices 0..m-1 carry the
/// Y*Y-block (the s2 block) and indices m..m+n-1 the YY*-block (s1).
/// Used by the resolvent experiment and the dense test oracle.
Eigen::MatrixXd assemble_W(const DataMatrix& Y);

}  // namespace rmt
