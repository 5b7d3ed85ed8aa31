#include "bsi/structured.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "bsi/kernels.hpp"

namespace bsi {

Eigen::MatrixXd SymTridiagonal::dense() const {
  const Eigen::Index m = d.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  out.diagonal() = d;
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    out(i + 1, i) = c(i);
    out(i, i + 1) = c(i);
  }
  return out;
}

Eigen::MatrixXd BlockTridiagonal::dense() const {
  const Eigen::Index m = block_count();
  const Eigen::Index n = block_size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m * n, m * n);
  for (Eigen::Index k = 0; k < m; ++k) {
    out.block(k * n, k * n, n, n) = D[static_cast<std::size_t>(k)];
    if (k + 1 < m) {
      const auto& ck = C[static_cast<std::size_t>(k)];
      out.block((k + 1) * n, k * n, n, n) = ck;
      out.block(k * n, (k + 1) * n, n, n) = ck.transpose();
    }
  }
  return out;
}

namespace {

struct ExpKernelTerms {
  Eigen::ArrayXd a;  // a_k between points k-1 and k, size m-1
  Eigen::Index m;
};

ExpKernelTerms neighbor_correlations(std::span<const double> t, std::span<const double> s,
                                     double l_corr) {
  const auto m = static_cast<Eigen::Index>(t.size());
  if (m < 1) throw std::invalid_argument("empty coordinate vector");
  if (s.size() != t.size()) {
    throw std::invalid_argument("scale vector length must match coordinates");
  }
  if (!(l_corr > kLengthscaleFloor)) {
    throw std::invalid_argument(
        "lengthscale at or below the IID floor; use the identity-correlation path");
  }
  for (double si : s) {
    if (!(si > 0.0)) throw std::invalid_argument("scales must be positive");
  }
  const double lambda = 1.0 / l_corr;
  Eigen::ArrayXd a(m > 1 ? m - 1 : 0);
  for (Eigen::Index k = 1; k < m; ++k) {
    const double dt = t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(k - 1)];
    if (!(dt > 0.0)) {
      throw std::invalid_argument(
          "time coordinates must be strictly increasing (duplicate at index " +
          std::to_string(k) + ")");
    }
    a(k - 1) = std::exp(-lambda * dt);
  }
  return {std::move(a), m};
}

}  // namespace

SymTridiagonal exp_kernel_precision(std::span<const double> t_coords,
                                    std::span<const double> scale, double l_corr) {
  const auto [a, m] = neighbor_correlations(t_coords, scale, l_corr);
  SymTridiagonal out;
  out.d.resize(m);
  out.c.resize(m > 1 ? m - 1 : 0);
  if (m == 1) {
    out.d(0) = 1.0 / (scale[0] * scale[0]);
    return out;
  }
  // g_k = 1/(1 - a_k^2); stable since a_k < 1 strictly for dt > 0.
  const Eigen::ArrayXd g = 1.0 / (1.0 - a.square());
  for (Eigen::Index i = 0; i < m; ++i) {
    double v;
    if (i == 0) {
      v = g(0);
    } else if (i == m - 1) {
      v = g(m - 2);
    } else {
      v = g(i - 1) + g(i) - 1.0;
    }
    const double si = scale[static_cast<std::size_t>(i)];
    out.d(i) = v / (si * si);
  }
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    out.c(i) = -a(i) * g(i) /
               (scale[static_cast<std::size_t>(i)] * scale[static_cast<std::size_t>(i + 1)]);
  }
  return out;
}

double exp_kernel_cov_logdet(std::span<const double> t_coords,
                             std::span<const double> scale, double l_corr) {
  const auto [a, m] = neighbor_correlations(t_coords, scale, l_corr);
  double out = 0.0;
  for (double si : scale) out += 2.0 * std::log(si);
  for (Eigen::Index k = 0; k < a.size(); ++k) out += std::log1p(-a(k) * a(k));
  return out;
}

double kron_logdet(double logdet_a, Eigen::Index dim_a, double logdet_b,
                   Eigen::Index dim_b) {
  if (dim_a < 1 || dim_b < 1) throw std::invalid_argument("factor dimensions must be >= 1");
  return static_cast<double>(dim_b) * logdet_a + static_cast<double>(dim_a) * logdet_b;
}

Eigen::VectorXd kron_matvec(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const Eigen::VectorXd& v) {
  if (v.size() != a.cols() * b.cols()) {
    throw std::invalid_argument("kron_matvec: vector length " + std::to_string(v.size()) +
                                " does not match cols(A)*cols(B) = " +
                                std::to_string(a.cols() * b.cols()));
  }
  const Eigen::Map<const Eigen::MatrixXd> x(v.data(), b.cols(), a.cols());
  const Eigen::MatrixXd y = b * x * a.transpose();
  return Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
}

Eigen::VectorXd thomas_solve(const SymTridiagonal& t, const Eigen::VectorXd& rhs) {
  const Eigen::Index m = t.size();
  if (rhs.size() != m) throw std::invalid_argument("thomas_solve: rhs length mismatch");
  Eigen::VectorXd pivot(m), z(m), w(m > 1 ? m - 1 : 0);
  pivot(0) = t.d(0);
  if (!(pivot(0) > 0.0)) throw NotPositiveDefiniteError("non-positive pivot at row 0");
  z(0) = rhs(0);
  for (Eigen::Index i = 1; i < m; ++i) {
    w(i - 1) = t.c(i - 1) / pivot(i - 1);
    pivot(i) = t.d(i) - t.c(i - 1) * w(i - 1);
    if (!(pivot(i) > 0.0)) {
      throw NotPositiveDefiniteError("non-positive pivot at row " + std::to_string(i));
    }
    z(i) = rhs(i) - w(i - 1) * z(i - 1);
  }
  Eigen::VectorXd x(m);
  x(m - 1) = z(m - 1) / pivot(m - 1);
  for (Eigen::Index i = m - 2; i >= 0; --i) {
    x(i) = z(i) / pivot(i) - w(i) * x(i + 1);
  }
  return x;
}

BlockCholeskyFactor block_tridiag_cholesky(const BlockTridiagonal& m) {
  const Eigen::Index nb = m.block_count();
  if (nb == 0) throw std::invalid_argument("empty block tridiagonal matrix");
  const Eigen::Index n = m.block_size();
  BlockCholeskyFactor f;
  f.L.reserve(static_cast<std::size_t>(nb));
  f.E.reserve(static_cast<std::size_t>(nb - 1));
  Eigen::MatrixXd s = m.D.front();
  for (Eigen::Index k = 0; k < nb; ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefiniteError("indefinite diagonal block at index " +
                                     std::to_string(k));
    }
    f.L.push_back(llt.matrixL());
    if (k + 1 < nb) {
      // E_k = C_k L_k^{-T}  <=>  L_k E_k^T = C_k^T
      const auto& lk = f.L.back();
      Eigen::MatrixXd et = lk.triangularView<Eigen::Lower>().solve(
          m.C[static_cast<std::size_t>(k)].transpose());
      f.E.emplace_back(et.transpose());
      s.noalias() = m.D[static_cast<std::size_t>(k + 1)] - f.E.back() * et;
    }
  }
  (void)n;
  return f;
}

Eigen::VectorXd block_tridiag_solve(const BlockCholeskyFactor& f,
                                    const Eigen::VectorXd& rhs) {
  const Eigen::Index nb = f.block_count();
  const Eigen::Index n = f.block_size();
  if (rhs.size() != nb * n) {
    throw std::invalid_argument("block_tridiag_solve: rhs length mismatch");
  }
  Eigen::VectorXd y(rhs.size());
  for (Eigen::Index k = 0; k < nb; ++k) {
    Eigen::VectorXd b = rhs.segment(k * n, n);
    if (k > 0) b.noalias() -= f.E[static_cast<std::size_t>(k - 1)] * y.segment((k - 1) * n, n);
    y.segment(k * n, n) =
        f.L[static_cast<std::size_t>(k)].triangularView<Eigen::Lower>().solve(b);
  }
  Eigen::VectorXd x(rhs.size());
  for (Eigen::Index k = nb - 1; k >= 0; --k) {
    Eigen::VectorXd b = y.segment(k * n, n);
    if (k + 1 < nb) {
      b.noalias() -= f.E[static_cast<std::size_t>(k)].transpose() * x.segment((k + 1) * n, n);
    }
    x.segment(k * n, n) = f.L[static_cast<std::size_t>(k)]
                              .triangularView<Eigen::Lower>()
                              .transpose()
                              .solve(b);
  }
  return x;
}

double logdet_from_block_cholesky(const BlockCholeskyFactor& f) {
  double out = 0.0;
  for (const auto& l : f.L) out += l.diagonal().array().log().sum();
  return 2.0 * out;
}

BlockTridiagonal scale_blocks(const SymTridiagonal& t, const Eigen::MatrixXd& b) {
  if (b.rows() != b.cols()) throw std::invalid_argument("scale_blocks: B must be square");
  BlockTridiagonal out;
  const Eigen::Index m = t.size();
  out.D.reserve(static_cast<std::size_t>(m));
  out.C.reserve(static_cast<std::size_t>(m > 0 ? m - 1 : 0));
  for (Eigen::Index k = 0; k < m; ++k) out.D.emplace_back(t.d(k) * b);
  for (Eigen::Index k = 0; k + 1 < m; ++k) out.C.emplace_back(t.c(k) * b);
  return out;
}

}  // namespace bsi
