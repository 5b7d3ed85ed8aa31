#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <string>
#include <vector>

#include "bsi/kernels.hpp"

namespace bsi {

enum class Lane { Left, Right };
enum class Girder { Left, Right };

std::string to_string(Lane lane);
Lane lane_from_string(std::string_view name);

/// Piecewise-constant cross-section properties, applying to all elements
/// whose midpoint lies at or before until_x (meters from the first support).
struct SectionZone {
  double until_x_m;
  double youngs_modulus_pa = 2.1e11;
  double second_moment_m4 = 1.0;
  double bottom_fiber_m = 1.5;  // neutral axis to instrumented flange
};

/// Twin-girder multi-span bridge description. Supports sit at the span
/// boundaries; the first four get rotational springs (theta_s), any
/// further ones are plain hinges. Girders are coupled by vertical springs
/// at regular stations.
struct BeamGeometry {
  std::vector<double> span_lengths_m{45.0, 50.0, 105.0, 50.0, 45.0};
  std::vector<SectionZone> sections{SectionZone{1e300}};
  double max_element_length_m = 2.0;
  double coupling_spacing_m = 5.4;
  double girder_spacing_m = 5.6;
  double deck_width_m = 9.0;
  Girder instrumented_girder = Girder::Right;

  double total_length_m() const;
  std::vector<double> support_positions() const;
  double girder_z(Girder g) const {
    return (g == Girder::Left ? -0.5 : 0.5) * girder_spacing_m;
  }
  void validate() const;
};

/// Structural parameters: rotational spring stiffnesses at the first four
/// supports (log10 kNm/rad) and the girder coupling stiffness (log10 kN/m).
struct ThetaS {
  std::array<double, 4> log10_kr{7.0, 7.0, 7.0, 7.0};
  double log10_kv = 4.0;
};

/// Axle train at a transverse deck position. Offsets are measured
/// backwards from the front axle and must be nondecreasing.
struct TruckLoad {
  std::vector<double> axle_offsets_m;
  std::vector<double> axle_loads_kn;
  Lane lane = Lane::Right;
  double z_m = 0.0;

  void validate() const;
  /// Five-axle campaign truck placed on the girder line of the given lane.
  static TruckLoad default_truck(Lane lane, const BeamGeometry& geometry);
};

/// Linear lever rule splitting a load at transverse position z between
/// the girders: (1,0) over the left girder, (0,1) over the right one,
/// (0.5,0.5) at the deck center. Factors always sum to one.
std::pair<double, double> lateral_load_function(double z, const BeamGeometry& geometry);

/// Euler-Bernoulli FE model of the twin girder system. Each node carries
/// a vertical translation and a rotation per girder; supports pin the
/// translations. Construction meshes the geometry once; all solves are
/// const and safe to run concurrently.
class TwinGirderModel {
 public:
  explicit TwinGirderModel(BeamGeometry geometry);

  const BeamGeometry& geometry() const { return geometry_; }
  const std::vector<double>& node_positions() const { return node_x_; }
  const std::vector<std::size_t>& support_nodes() const { return support_nodes_; }
  std::size_t dof_count() const { return 4 * node_x_.size(); }

  /// Constrained global stiffness (support translations eliminated).
  Eigen::SparseMatrix<double> assemble(const ThetaS& theta) const;

  /// Displacements (full numbering, meters/radians, downward positive)
  /// for the truck placed with its front axle at `position`.
  Eigen::VectorXd solve_static(const ThetaS& theta, const TruckLoad& truck,
                               double position) const;

  double vertical_displacement(const Eigen::VectorXd& u, Girder g, double x) const;
  double bottom_fiber_stress_mpa(const Eigen::VectorXd& u, Girder g, double x) const;

  /// Bottom-fiber stress (MPa) at one sensor of the instrumented girder
  /// for each load position.
  Eigen::VectorXd influence_line(const ThetaS& theta, const TruckLoad& truck,
                                 double sensor_x,
                                 const std::vector<double>& load_positions) const;

  /// Stacked response for all trucks over the grid, one factorization for
  /// all load cases. Block order: truck-major, then time-major over the
  /// grid (entry k*n_x + j is sensor j at load position k).
  Eigen::VectorXd response_grid(const ThetaS& theta, const std::vector<TruckLoad>& trucks,
                                const SpaceTimeGrid& grid) const;

 private:
  struct Element {
    std::size_t node;  // left node index; spans [node, node+1]
    double length;
    double ei_kn_m2;
    double e_pa;
    double c_m;
  };

  std::size_t dof(Girder g, std::size_t node, int comp) const {
    return (static_cast<std::size_t>(g) * node_x_.size() + node) * 2 +
           static_cast<std::size_t>(comp);
  }
  std::size_t element_at(double x) const;
  Eigen::VectorXd load_vector(const TruckLoad& truck, double position) const;
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;

  BeamGeometry geometry_;
  std::vector<double> node_x_;
  std::vector<Element> elements_;
  std::vector<std::size_t> support_nodes_;
  std::vector<std::size_t> coupling_nodes_;
  std::vector<Eigen::Index> reduced_index_;  // -1 for constrained dofs
  Eigen::Index n_reduced_ = 0;
};

}  // namespace bsi
