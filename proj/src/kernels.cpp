#include "bsi/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace bsi {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::IID: return "IID";
    case KernelKind::RBF: return "RBF";
    case KernelKind::EXP: return "EXP";
  }
  throw std::logic_error("unreachable kernel kind");
}

KernelKind kernel_from_string(std::string_view name) {
  if (name == "IID") return KernelKind::IID;
  if (name == "RBF") return KernelKind::RBF;
  if (name == "EXP") return KernelKind::EXP;
  throw std::invalid_argument("unknown kernel '" + std::string(name) +
                              "' (expected IID, RBF or EXP)");
}

double eval_kernel(KernelKind kind, double a, double b, double l_corr) {
  if (kind == KernelKind::IID) return a == b ? 1.0 : 0.0;
  if (!(l_corr > 0.0)) {
    throw std::invalid_argument("correlation lengthscale must be positive for " +
                                to_string(kind));
  }
  const double d = std::abs(a - b);
  switch (kind) {
    case KernelKind::RBF: return std::exp(-d * d / (2.0 * l_corr * l_corr));
    case KernelKind::EXP: return std::exp(-d / l_corr);
    default: return d == 0.0 ? 1.0 : 0.0;
  }
}

namespace {

void check_strictly_increasing(const std::vector<double>& coords, const char* what) {
  for (std::size_t i = 1; i < coords.size(); ++i) {
    if (!(coords[i] > coords[i - 1])) {
      throw std::invalid_argument(std::string(what) +
                                  " must be strictly increasing (duplicate or "
                                  "descending entry at index " +
                                  std::to_string(i) + ")");
    }
  }
}

}  // namespace

Eigen::MatrixXd correlation_matrix(KernelKind kind, const std::vector<double>& coords,
                                   double l_corr) {
  check_strictly_increasing(coords, "coordinates");
  const auto n = static_cast<Eigen::Index>(coords.size());
  const KernelKind eff = effective_kind(kind, l_corr);
  if (eff == KernelKind::IID) return Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = eval_kernel(eff, coords[static_cast<std::size_t>(i)],
                                   coords[static_cast<std::size_t>(j)], l_corr);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

SpaceTimeGrid::SpaceTimeGrid(std::vector<double> x_coords, std::vector<double> t_coords)
    : x_(std::move(x_coords)), t_(std::move(t_coords)) {
  if (x_.empty() || t_.empty()) {
    throw std::invalid_argument("grid must have at least one sensor and one time point");
  }
  check_strictly_increasing(x_, "sensor coordinates");
  check_strictly_increasing(t_, "time coordinates");
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> separable_correlation(
    KernelKind kt, KernelKind kx, const SpaceTimeGrid& grid, double l_corr_t,
    double l_corr_x) {
  return {correlation_matrix(kt, grid.t_coords(), l_corr_t),
          correlation_matrix(kx, grid.x_coords(), l_corr_x)};
}

}  // namespace bsi
