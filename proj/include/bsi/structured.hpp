#pragma once

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <vector>

namespace bsi {

/// Thrown when a factorization meets an indefinite pivot or block.
class NotPositiveDefiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric tridiagonal matrix stored as two flat vectors:
/// d holds the m diagonal entries, c the m-1 off-diagonal entries.
struct SymTridiagonal {
  Eigen::VectorXd d;
  Eigen::VectorXd c;

  Eigen::Index size() const { return d.size(); }
  Eigen::MatrixXd dense() const;
};

/// Symmetric block tridiagonal matrix: m diagonal blocks D_k (each
/// symmetric n x n) and m-1 sub-diagonal blocks C_k at (k+1, k).
struct BlockTridiagonal {
  std::vector<Eigen::MatrixXd> D;
  std::vector<Eigen::MatrixXd> C;

  Eigen::Index block_count() const { return static_cast<Eigen::Index>(D.size()); }
  Eigen::Index block_size() const { return D.empty() ? 0 : D.front().rows(); }
  Eigen::MatrixXd dense() const;
};

/// Lower block bidiagonal Cholesky factor: M = L_full L_full^T with
/// lower-triangular diagonal blocks L_k and dense sub-diagonal blocks E_k.
struct BlockCholeskyFactor {
  std::vector<Eigen::MatrixXd> L;
  std::vector<Eigen::MatrixXd> E;

  Eigen::Index block_count() const { return static_cast<Eigen::Index>(L.size()); }
  Eigen::Index block_size() const { return L.empty() ? 0 : L.front().rows(); }
};

/// Analytic tridiagonal inverse of the exponential-kernel covariance
/// with entries scale_i * scale_j * exp(-|t_i - t_j| / l_corr).
///
/// With a_k = exp(-(t_k - t_{k-1}) / l_corr) the inverse has diagonal
///   d_1 = 1/s_1^2 * 1/(1-a_2^2),
///   d_i = 1/s_i^2 * (1/(1-a_i^2) + 1/(1-a_{i+1}^2) - 1),
///   d_m = 1/s_m^2 * 1/(1-a_m^2),
/// and off-diagonal c_i = -a_{i+1} / ((1-a_{i+1}^2) s_i s_{i+1}).
///
/// Requires strictly increasing t (a_k < 1), positive scales and a
/// lengthscale above the IID floor; callers must route degenerate
/// lengthscales to the identity-correlation path instead.
SymTridiagonal exp_kernel_precision(std::span<const double> t_coords,
                                    std::span<const double> scale, double l_corr);

/// Log-determinant of the same covariance, via the closed form
/// 2 * sum(log scale_i) + sum(log(1 - a_k^2)). O(m), no factorization.
double exp_kernel_cov_logdet(std::span<const double> t_coords,
                             std::span<const double> scale, double l_corr);

/// log|A (x) B| = dim_B * log|A| + dim_A * log|B|.
double kron_logdet(double logdet_a, Eigen::Index dim_a, double logdet_b,
                   Eigen::Index dim_b);

/// (A (x) B) v without forming the Kronecker product, via the reshape
/// identity (A (x) B) vec(X) = vec(B X A^T) with X of shape
/// (cols B) x (cols A) read column-major from v.
Eigen::VectorXd kron_matvec(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const Eigen::VectorXd& v);

/// Solves T x = rhs for symmetric positive definite tridiagonal T in
/// O(m) time and memory. Throws NotPositiveDefiniteError on a
/// non-positive pivot.
Eigen::VectorXd thomas_solve(const SymTridiagonal& t, const Eigen::VectorXd& rhs);

/// Blockwise Cholesky of a symmetric positive definite block
/// tridiagonal matrix:
///   L_1 L_1^T = D_1,  E_k = C_k L_k^{-T},  L_{k+1} L_{k+1}^T = D_{k+1} - E_k E_k^T.
BlockCholeskyFactor block_tridiag_cholesky(const BlockTridiagonal& m);

/// Solves (L L^T) x = rhs by forward then backward block substitution.
Eigen::VectorXd block_tridiag_solve(const BlockCholeskyFactor& f,
                                    const Eigen::VectorXd& rhs);

/// log|M| = 2 * sum over diagonal blocks of log diag(L_k).
double logdet_from_block_cholesky(const BlockCholeskyFactor& f);

/// Block tridiagonal representation of T (x) B for symmetric B:
/// D_k = d_k B, C_k = c_k B.
BlockTridiagonal scale_blocks(const SymTridiagonal& t, const Eigen::MatrixXd& b);

}  // namespace bsi
