#include "bsi/likelihood.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "bsi/structured.hpp"

namespace bsi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Below this the multiplicative error term is numerically zero and the
// covariance collapses to the measurement noise diagonal.
constexpr double kCvFloor = 1e-12;

double diagonal_loglik(const Eigen::VectorXd& r, double variance) {
  if (!(variance > 0.0)) {
    throw NotPositiveDefiniteError("zero covariance: all error scales vanish");
  }
  const auto n = static_cast<double>(r.size());
  return -0.5 * (n * std::log(variance) + r.squaredNorm() / variance + n * std::log(kTwoPi));
}

void check_lengths(const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
                   const SpaceTimeGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (y_obs.size() != n || y_model.size() != n) {
    throw std::invalid_argument("observation/model vectors must have grid size " +
                                std::to_string(n));
  }
}

}  // namespace

std::string to_string(ErrorStructure s) {
  return s == ErrorStructure::Multiplicative ? "multiplicative" : "additive";
}

std::string to_string(LikPath p) {
  switch (p) {
    case LikPath::MultiplicativeFast: return "multiplicative_fast";
    case LikPath::AdditiveEigen: return "additive_eigen";
    case LikPath::Dense: return "dense";
  }
  throw std::logic_error("unreachable likelihood path");
}

void ProbModelSpec::validate() const {
  if (c_v < 0.0) throw std::invalid_argument("c_v must be non-negative");
  if (sigma_model < 0.0) throw std::invalid_argument("sigma_model must be non-negative");
  if (sigma_meas < 0.0) throw std::invalid_argument("sigma_meas must be non-negative");
  if (l_corr_t < 0.0 || l_corr_x < 0.0) {
    throw std::invalid_argument("correlation lengthscales must be non-negative");
  }
}

Eigen::MatrixXd build_covariance_dense(const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                                       const Eigen::VectorXd& y_model,
                                       std::size_t dense_cap) {
  spec.validate();
  check_lengths(y_model, y_model, grid);
  const std::size_t n = grid.size();
  if (n > dense_cap) {
    throw std::invalid_argument("dense covariance refused: N = " + std::to_string(n) +
                                " exceeds cap " + std::to_string(dense_cap));
  }
  const auto [ct, cx] = separable_correlation(spec.kt, spec.kx, grid, spec.l_corr_t,
                                              spec.l_corr_x);
  const auto nn = static_cast<Eigen::Index>(n);
  const auto nx = static_cast<Eigen::Index>(grid.n_x());
  Eigen::MatrixXd sigma(nn, nn);
  const bool mult = spec.error_structure == ErrorStructure::Multiplicative;
  const double amp = mult ? spec.c_v * spec.c_v : spec.sigma_model * spec.sigma_model;
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double rho = ct(i / nx, j / nx) * cx(i % nx, j % nx);
      double v = amp * rho;
      if (mult) v *= y_model(i) * y_model(j);
      sigma(i, j) = v;
      sigma(j, i) = v;
    }
  }
  sigma.diagonal().array() += spec.sigma_meas * spec.sigma_meas;
  return sigma;
}

double loglik_dense(const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
                    const Eigen::MatrixXd& sigma) {
  if (y_obs.size() != y_model.size() || y_obs.size() != sigma.rows() ||
      sigma.rows() != sigma.cols()) {
    throw std::invalid_argument("loglik_dense: dimension mismatch");
  }
  const Eigen::VectorXd r = y_obs - y_model;
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("dense covariance is not positive definite");
  }
  const double logdet =
      2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  const double quad = r.dot(llt.solve(r));
  const auto n = static_cast<double>(r.size());
  return -0.5 * (logdet + quad + n * std::log(kTwoPi));
}

double loglik_multiplicative_fast(const Eigen::VectorXd& y_obs,
                                  const Eigen::VectorXd& y_model,
                                  const ProbModelSpec& spec, const SpaceTimeGrid& grid) {
  spec.validate();
  check_lengths(y_obs, y_model, grid);
  if (spec.error_structure != ErrorStructure::Multiplicative) {
    throw std::invalid_argument("multiplicative path called with additive model");
  }
  const KernelKind kt = effective_kind(spec.kt, spec.l_corr_t);
  const KernelKind kx = effective_kind(spec.kx, spec.l_corr_x);
  if (kt == KernelKind::RBF) {
    throw UnsupportedModelError(
        "RBF temporal correlation has no tridiagonal inverse; use the dense path (or an "
        "additive-error model, which takes the eigen path)");
  }
  if (!(spec.sigma_meas > 0.0)) {
    throw std::invalid_argument(
        "multiplicative fast path requires sigma_meas > 0 (the Woodbury substitution "
        "inverts the noise covariance)");
  }
  const Eigen::VectorXd r = y_obs - y_model;
  const double noise_var = spec.sigma_meas * spec.sigma_meas;
  if (spec.c_v <= kCvFloor) return diagonal_loglik(r, noise_var);

  const auto m = static_cast<Eigen::Index>(grid.n_t());
  const auto nx = static_cast<Eigen::Index>(grid.n_x());
  const auto n = static_cast<double>(grid.size());

  // Temporal covariance factor S_t = c_v^2 C_t: analytic tridiagonal
  // inverse and closed-form log-determinant.
  const std::vector<double> cv_scale(static_cast<std::size_t>(m), spec.c_v);
  SymTridiagonal t_inv;
  double logdet_t;
  if (kt == KernelKind::IID) {
    t_inv.d = Eigen::VectorXd::Constant(m, 1.0 / (spec.c_v * spec.c_v));
    t_inv.c = Eigen::VectorXd::Zero(m > 1 ? m - 1 : 0);
    logdet_t = static_cast<double>(m) * 2.0 * std::log(spec.c_v);
  } else {
    t_inv = exp_kernel_precision(grid.t_coords(), cv_scale, spec.l_corr_t);
    logdet_t = exp_kernel_cov_logdet(grid.t_coords(), cv_scale, spec.l_corr_t);
  }

  // Spatial correlation factor: small dense block, inverted once.
  Eigen::MatrixXd cx_inv;
  double logdet_x;
  if (kx == KernelKind::IID) {
    cx_inv = Eigen::MatrixXd::Identity(nx, nx);
    logdet_x = 0.0;
  } else {
    const Eigen::MatrixXd cx = correlation_matrix(kx, grid.x_coords(), spec.l_corr_x);
    Eigen::LLT<Eigen::MatrixXd> llt(cx);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefiniteError("spatial correlation factor is not positive definite");
    }
    logdet_x = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    cx_inv = llt.solve(Eigen::MatrixXd::Identity(nx, nx));
  }

  // Inner matrix of the Woodbury identity: S_eta^{-1} + Y^T W^{-1} Y,
  // block tridiagonal plus diagonal.
  BlockTridiagonal inner = scale_blocks(t_inv, cx_inv);
  for (Eigen::Index k = 0; k < m; ++k) {
    auto yk = y_model.segment(k * nx, nx).array();
    inner.D[static_cast<std::size_t>(k)].diagonal().array() += yk.square() / noise_var;
  }
  const BlockCholeskyFactor factor = block_tridiag_cholesky(inner);

  const Eigen::VectorXd u = y_model.cwiseProduct(r) / noise_var;  // (W^{-1} Y)^T r
  const Eigen::VectorXd x = block_tridiag_solve(factor, u);
  const double quad = r.squaredNorm() / noise_var - u.dot(x);

  // Determinant lemma: |S| = |S_eta^{-1} + Y^T W^{-1} Y| |S_eta| |W|.
  const double logdet_eta = kron_logdet(logdet_t, m, logdet_x, nx);
  const double logdet =
      logdet_from_block_cholesky(factor) + logdet_eta + n * std::log(noise_var);
  return -0.5 * (logdet + quad + n * std::log(kTwoPi));
}

double loglik_additive_fast(const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
                            const ProbModelSpec& spec, const SpaceTimeGrid& grid) {
  spec.validate();
  check_lengths(y_obs, y_model, grid);
  if (spec.error_structure != ErrorStructure::Additive) {
    throw std::invalid_argument("additive path called with multiplicative model");
  }
  const auto m = static_cast<Eigen::Index>(grid.n_t());
  const auto nx = static_cast<Eigen::Index>(grid.n_x());
  const Eigen::VectorXd r = y_obs - y_model;
  const double noise_var = spec.sigma_meas * spec.sigma_meas;
  const double model_var = spec.sigma_model * spec.sigma_model;
  if (model_var == 0.0) return diagonal_loglik(r, noise_var);

  const KernelKind kt = effective_kind(spec.kt, spec.l_corr_t);
  const KernelKind kx = effective_kind(spec.kx, spec.l_corr_x);

  Eigen::VectorXd lam_t, lam_x;
  Eigen::MatrixXd qt, qx;
  if (kt == KernelKind::IID) {
    lam_t = Eigen::VectorXd::Ones(m);
    qt = Eigen::MatrixXd::Identity(m, m);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        correlation_matrix(kt, grid.t_coords(), spec.l_corr_t));
    lam_t = es.eigenvalues().cwiseMax(0.0);  // clip round-off negatives
    qt = es.eigenvectors();
  }
  if (kx == KernelKind::IID) {
    lam_x = Eigen::VectorXd::Ones(nx);
    qx = Eigen::MatrixXd::Identity(nx, nx);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        correlation_matrix(kx, grid.x_coords(), spec.l_corr_x));
    lam_x = es.eigenvalues().cwiseMax(0.0);
    qx = es.eigenvectors();
  }

  // Rotate the residual into the joint eigenbasis; the covariance is
  // diagonal there with entries sigma_model^2 lam_t,i lam_x,j + sigma_meas^2.
  const Eigen::VectorXd w = kron_matvec(qt.transpose(), qx.transpose(), r);
  double logdet = 0.0;
  double quad = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < nx; ++j) {
      const double e = model_var * lam_t(i) * lam_x(j) + noise_var;
      if (!(e > 0.0)) {
        throw NotPositiveDefiniteError(
            "additive covariance is rank deficient with sigma_meas = 0");
      }
      const double wk = w(i * nx + j);
      logdet += std::log(e);
      quad += wk * wk / e;
    }
  }
  const auto n = static_cast<double>(grid.size());
  return -0.5 * (logdet + quad + n * std::log(kTwoPi));
}

LoglikResult loglik(const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
                    const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                    std::size_t dense_cap) {
  if (spec.error_structure == ErrorStructure::Additive) {
    return {loglik_additive_fast(y_obs, y_model, spec, grid), LikPath::AdditiveEigen};
  }
  const KernelKind kt = effective_kind(spec.kt, spec.l_corr_t);
  if (kt != KernelKind::RBF && spec.sigma_meas > 0.0) {
    return {loglik_multiplicative_fast(y_obs, y_model, spec, grid),
            LikPath::MultiplicativeFast};
  }
  if (grid.size() <= dense_cap) {
    return {loglik_dense(y_obs, y_model, build_covariance_dense(spec, grid, y_model, dense_cap)),
            LikPath::Dense};
  }
  throw UnsupportedModelError(
      "no valid likelihood path: multiplicative model with " + to_string(kt) +
      " temporal kernel needs the dense path, but N = " + std::to_string(grid.size()) +
      " exceeds the dense cap " + std::to_string(dense_cap));
}

LoglikResult loglik_blocks(const Eigen::VectorXd& y_obs, const Eigen::VectorXd& y_model,
                           const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                           std::size_t n_blocks, std::size_t dense_cap) {
  if (n_blocks == 0) throw std::invalid_argument("need at least one block");
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto total = n * static_cast<Eigen::Index>(n_blocks);
  if (y_obs.size() != total || y_model.size() != total) {
    throw std::invalid_argument("block vectors must have length n_blocks * grid size");
  }
  double sum = 0.0;
  LikPath path = LikPath::Dense;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const auto off = static_cast<Eigen::Index>(b) * n;
    const auto res =
        loglik(y_obs.segment(off, n), y_model.segment(off, n), spec, grid, dense_cap);
    sum += res.value;
    path = res.path;
  }
  return {sum, path};
}

}  // namespace bsi
