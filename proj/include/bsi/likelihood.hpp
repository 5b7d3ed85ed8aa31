#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <string>

#include "bsi/kernels.hpp"

namespace bsi {

/// Raised when no evaluation path supports the requested configuration
/// (e.g. RBF temporal kernel with multiplicative error above the dense cap).
class UnsupportedModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ErrorStructure { Multiplicative, Additive };

std::string to_string(ErrorStructure s);

/// Probabilistic model: error structure, space/time kernels and the
/// parameters theta_c. Units: sigmas in MPa, lengthscales in meters,
/// c_v dimensionless.
struct ProbModelSpec {
  ErrorStructure error_structure = ErrorStructure::Additive;
  KernelKind kt = KernelKind::IID;
  KernelKind kx = KernelKind::IID;
  double c_v = 0.0;          // COV of the multiplicative prediction error
  double sigma_model = 0.0;  // std of the additive prediction error
  double sigma_meas = 0.0;   // std of the measurement error
  double l_corr_t = 0.0;
  double l_corr_x = 0.0;

  void validate() const;
};

/// Default cap for forming dense N x N covariance matrices.
inline constexpr std::size_t kDenseCapDefault = 4096;

/// Dense N x N covariance of the data generating process on the grid.
/// Multiplicative: diag(y) (c_v^2 C_t (x) C_x) diag(y) + sigma_meas^2 I.
/// Additive:       sigma_model^2 (C_t (x) C_x) + sigma_meas^2 I.
/// Reference path only; refuses N above the cap.
Eigen::MatrixXd build_covariance_dense(const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                                       const Eigen::VectorXd& y_model,
                                       std::size_t dense_cap = kDenseCapDefault);

/// Gaussian log-likelihood -0.5 (log|S| + r^T S^{-1} r + N log 2pi) via a
/// dense Cholesky factorization of S. The reference implementation all
/// fast paths are checked against.
double loglik_dense(const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
                    const Eigen::MatrixXd& sigma);

/// Fast multiplicative-error path. Requires exponential (or degenerate
/// IID) temporal correlation and sigma_meas > 0. Never forms the N x N
/// covariance: the quadratic form goes through the Woodbury identity with
/// the inner block tridiagonal system factorized blockwise, and the
/// log-determinant through the matrix determinant lemma. O(m n_x^3) time,
/// O(m n_x^2) memory for m time points and n_x sensors.
double loglik_multiplicative_fast(const Eigen::VectorXd& y_obs,
                                  const Eigen::VectorXd& y_model,
                                  const ProbModelSpec& spec, const SpaceTimeGrid& grid);

/// Fast additive-error path via eigendecomposition of the two Kronecker
/// factors; works for any kernel pair. O(m^3 + n_x^3 + N (m + n_x)).
double loglik_additive_fast(const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
                            const ProbModelSpec& spec, const SpaceTimeGrid& grid);

enum class LikPath { MultiplicativeFast, AdditiveEigen, Dense };

std::string to_string(LikPath p);

struct LoglikResult {
  double value;
  LikPath path;
};

/// Routes to the cheapest valid path: structured multiplicative for
/// exponential-in-time kernels, eigen path for additive models, dense
/// fallback below the cap. Throws UnsupportedModelError when nothing
/// applies.
LoglikResult loglik(const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
                    const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                    std::size_t dense_cap = kDenseCapDefault);

/// Sum of independent per-lane blocks sharing one grid and model; y
/// vectors hold the lane blocks consecutively, each time-major.
LoglikResult loglik_blocks(const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
                           const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                           std::size_t n_blocks,
                           std::size_t dense_cap = kDenseCapDefault);

}  // namespace bsi
