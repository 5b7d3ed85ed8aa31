#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bsi {

/// Stationary correlation functions used for the model prediction error.
enum class KernelKind { IID, RBF, EXP };

std::string to_string(KernelKind kind);
KernelKind kernel_from_string(std::string_view name);

/// Lengthscales at or below this are treated as zero correlation length:
/// the kernel degenerates to IID (identity correlation). Keeps the
/// structured paths away from the 0/0 limit of the precision formulas.
inline constexpr double kLengthscaleFloor = 1e-9;

/// Returns the kind actually in effect once the lengthscale floor is applied.
inline KernelKind effective_kind(KernelKind kind, double l_corr) {
  if (kind != KernelKind::IID && l_corr <= kLengthscaleFloor) return KernelKind::IID;
  return kind;
}

/// Correlation between two scalar coordinates. Unit at zero distance,
/// strictly decreasing in |a-b| for RBF/EXP, indicator for IID.
double eval_kernel(KernelKind kind, double a, double b, double l_corr);

/// Dense correlation matrix over strictly increasing coordinates.
/// Symmetric with unit diagonal; IID and sub-floor lengthscales give the
/// identity.
Eigen::MatrixXd correlation_matrix(KernelKind kind, const std::vector<double>& coords,
                                   double l_corr);

/// Observation lattice: sensor positions crossed with load positions.
/// Vectorization is time-major: block k of the flattened vector holds all
/// sensors at t_coords[k], matching a Kronecker product C_t (x) C_x.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(std::vector<double> x_coords, std::vector<double> t_coords);

  const std::vector<double>& x_coords() const { return x_; }
  const std::vector<double>& t_coords() const { return t_; }
  std::size_t n_x() const { return x_.size(); }
  std::size_t n_t() const { return t_.size(); }
  std::size_t size() const { return x_.size() * t_.size(); }

  /// Flat index of (time index k, sensor index j).
  std::size_t index(std::size_t k, std::size_t j) const { return k * x_.size() + j; }

 private:
  std::vector<double> x_;
  std::vector<double> t_;
};

/// The two Kronecker factors (C_t, C_x) of the separable correlation.
/// The full N x N matrix C_t (x) C_x is never formed here.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> separable_correlation(
    KernelKind kt, KernelKind kx, const SpaceTimeGrid& grid, double l_corr_t,
    double l_corr_x);

}  // namespace bsi
