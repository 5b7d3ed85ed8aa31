#include "bsi/beam.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bsi {

std::string to_string(Lane lane) { return lane == Lane::Left ? "left" : "right"; }

Lane lane_from_string(std::string_view name) {
  if (name == "left") return Lane::Left;
  if (name == "right") return Lane::Right;
  throw std::invalid_argument("unknown lane '" + std::string(name) +
                              "' (expected left or right)");
}

double BeamGeometry::total_length_m() const {
  double sum = 0.0;
  for (double s : span_lengths_m) sum += s;
  return sum;
}

std::vector<double> BeamGeometry::support_positions() const {
  std::vector<double> out{0.0};
  double x = 0.0;
  for (double s : span_lengths_m) {
    x += s;
    out.push_back(x);
  }
  return out;
}

void BeamGeometry::validate() const {
  if (span_lengths_m.empty()) throw std::invalid_argument("geometry needs at least one span");
  for (double s : span_lengths_m) {
    if (!(s > 0.0)) throw std::invalid_argument("span lengths must be positive");
  }
  if (!(max_element_length_m > 0.0)) {
    throw std::invalid_argument("max element length must be positive");
  }
  if (!(coupling_spacing_m > 0.0)) {
    throw std::invalid_argument("coupling spacing must be positive");
  }
  if (!(girder_spacing_m > 0.0) || deck_width_m < girder_spacing_m) {
    throw std::invalid_argument("deck must be at least as wide as the girder spacing");
  }
  if (sections.empty()) throw std::invalid_argument("geometry needs at least one section zone");
  double prev = 0.0;
  for (const auto& z : sections) {
    if (!(z.until_x_m > prev)) {
      throw std::invalid_argument("section zones must have increasing until_x");
    }
    if (!(z.youngs_modulus_pa > 0.0) || !(z.second_moment_m4 > 0.0) ||
        !(z.bottom_fiber_m > 0.0)) {
      throw std::invalid_argument("section properties must be positive");
    }
    prev = z.until_x_m;
  }
  if (sections.back().until_x_m < total_length_m()) {
    throw std::invalid_argument("section zones must cover the full bridge length");
  }
}

void TruckLoad::validate() const {
  if (axle_offsets_m.size() != axle_loads_kn.size() || axle_offsets_m.empty()) {
    throw std::invalid_argument("truck needs matching, non-empty axle offset/load lists");
  }
  for (std::size_t i = 0; i < axle_offsets_m.size(); ++i) {
    if (axle_offsets_m[i] < 0.0) throw std::invalid_argument("axle offsets must be >= 0");
    if (i > 0 && axle_offsets_m[i] < axle_offsets_m[i - 1]) {
      throw std::invalid_argument("axle offsets must be nondecreasing");
    }
    if (!(axle_loads_kn[i] > 0.0)) throw std::invalid_argument("axle loads must be positive");
  }
}

TruckLoad TruckLoad::default_truck(Lane lane, const BeamGeometry& geometry) {
  TruckLoad t;
  t.axle_offsets_m = {0.0, 2.06, 3.89, 5.71, 7.53};
  t.axle_loads_kn = {59.35, 108.82, 108.82, 108.82, 108.82};
  t.lane = lane;
  t.z_m = geometry.girder_z(lane == Lane::Left ? Girder::Left : Girder::Right);
  return t;
}

std::pair<double, double> lateral_load_function(double z, const BeamGeometry& geometry) {
  if (std::abs(z) > 0.5 * geometry.deck_width_m + 1e-12) {
    throw std::invalid_argument("transverse position outside the deck");
  }
  const double f_right = 0.5 + z / geometry.girder_spacing_m;
  return {1.0 - f_right, f_right};
}

TwinGirderModel::TwinGirderModel(BeamGeometry geometry) : geometry_(std::move(geometry)) {
  geometry_.validate();

  // Mesh each span into equal elements so support positions land on nodes.
  node_x_.push_back(0.0);
  support_nodes_.push_back(0);
  double span_start = 0.0;
  for (double span : geometry_.span_lengths_m) {
    const auto n_el = static_cast<std::size_t>(
        std::ceil(span / geometry_.max_element_length_m - 1e-12));
    const double h = span / static_cast<double>(n_el);
    for (std::size_t i = 1; i <= n_el; ++i) {
      node_x_.push_back(i == n_el ? span_start + span
                                  : span_start + h * static_cast<double>(i));
    }
    span_start += span;
    support_nodes_.push_back(node_x_.size() - 1);
  }

  std::size_t zone = 0;
  for (std::size_t e = 0; e + 1 < node_x_.size(); ++e) {
    const double mid = 0.5 * (node_x_[e] + node_x_[e + 1]);
    while (zone + 1 < geometry_.sections.size() &&
           mid > geometry_.sections[zone].until_x_m) {
      ++zone;
    }
    const auto& s = geometry_.sections[zone];
    const double e_kn = s.youngs_modulus_pa / 1e3;  // kN/m^2
    elements_.push_back(Element{e, node_x_[e + 1] - node_x_[e], e_kn * s.second_moment_m4,
                                s.youngs_modulus_pa, s.bottom_fiber_m});
  }

  // Coupling stations at multiples of the spacing, snapped to the nearest node.
  const double total = geometry_.total_length_m();
  for (double x = geometry_.coupling_spacing_m; x < total - 1e-9;
       x += geometry_.coupling_spacing_m) {
    const std::size_t node = element_at(x) +
                             (x - node_x_[element_at(x)] > 0.5 * elements_[element_at(x)].length
                                  ? 1
                                  : 0);
    if (coupling_nodes_.empty() || coupling_nodes_.back() != node) {
      coupling_nodes_.push_back(node);
    }
  }

  // Pin vertical translations at all supports of both girders.
  reduced_index_.assign(dof_count(), 0);
  for (std::size_t s : support_nodes_) {
    reduced_index_[dof(Girder::Left, s, 0)] = -1;
    reduced_index_[dof(Girder::Right, s, 0)] = -1;
  }
  for (auto& idx : reduced_index_) {
    if (idx >= 0) idx = n_reduced_++;
  }
}

std::size_t TwinGirderModel::element_at(double x) const {
  if (x < node_x_.front() - 1e-9 || x > node_x_.back() + 1e-9) {
    throw std::invalid_argument("position " + std::to_string(x) + " outside the bridge");
  }
  const auto it = std::lower_bound(node_x_.begin(), node_x_.end(), x);
  auto idx = static_cast<std::size_t>(it - node_x_.begin());
  if (idx > 0) --idx;  // x exactly on a node belongs to the element on its left
  return std::min(idx, elements_.size() - 1);
}

Eigen::SparseMatrix<double> TwinGirderModel::assemble(const ThetaS& theta) const {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(32 * elements_.size() + 16);

  auto add = [&](std::size_t gi, std::size_t gj, double v) {
    const Eigen::Index i = reduced_index_[gi];
    const Eigen::Index j = reduced_index_[gj];
    if (i >= 0 && j >= 0) trip.emplace_back(i, j, v);
  };

  for (int g = 0; g < 2; ++g) {
    const auto girder = static_cast<Girder>(g);
    for (const auto& el : elements_) {
      const double h = el.length;
      const double k = el.ei_kn_m2 / (h * h * h);
      const double ke[4][4] = {
          {12 * k, 6 * h * k, -12 * k, 6 * h * k},
          {6 * h * k, 4 * h * h * k, -6 * h * k, 2 * h * h * k},
          {-12 * k, -6 * h * k, 12 * k, -6 * h * k},
          {6 * h * k, 2 * h * h * k, -6 * h * k, 4 * h * h * k}};
      const std::size_t dofs[4] = {dof(girder, el.node, 0), dof(girder, el.node, 1),
                                   dof(girder, el.node + 1, 0), dof(girder, el.node + 1, 1)};
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) add(dofs[a], dofs[b], ke[a][b]);
      }
    }
    // Rotational springs at the first four supports; the rest stay hinged.
    for (std::size_t s = 0; s < support_nodes_.size() && s < 4; ++s) {
      const double kr = std::pow(10.0, theta.log10_kr[s]);
      add(dof(girder, support_nodes_[s], 1), dof(girder, support_nodes_[s], 1), kr);
    }
  }

  const double kv = std::pow(10.0, theta.log10_kv);
  for (std::size_t node : coupling_nodes_) {
    const std::size_t wl = dof(Girder::Left, node, 0);
    const std::size_t wr = dof(Girder::Right, node, 0);
    add(wl, wl, kv);
    add(wr, wr, kv);
    add(wl, wr, -kv);
    add(wr, wl, -kv);
  }

  Eigen::SparseMatrix<double> k(n_reduced_, n_reduced_);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

Eigen::VectorXd TwinGirderModel::load_vector(const TruckLoad& truck, double position) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n_reduced_);
  const auto [f_left, f_right] = lateral_load_function(truck.z_m, geometry_);
  for (std::size_t a = 0; a < truck.axle_offsets_m.size(); ++a) {
    const double x = position - truck.axle_offsets_m[a];
    if (x < 0.0 || x > node_x_.back()) continue;  // axle off the bridge
    const auto it = std::lower_bound(node_x_.begin(), node_x_.end(), x);
    std::size_t node = static_cast<std::size_t>(it - node_x_.begin());
    if (node > 0 && (node == node_x_.size() || x - node_x_[node - 1] < node_x_[node] - x)) {
      --node;
    }
    const double p = truck.axle_loads_kn[a];
    const Eigen::Index il = reduced_index_[dof(Girder::Left, node, 0)];
    const Eigen::Index ir = reduced_index_[dof(Girder::Right, node, 0)];
    if (il >= 0) f(il) += p * f_left;
    if (ir >= 0) f(ir) += p * f_right;
  }
  return f;
}

Eigen::VectorXd TwinGirderModel::expand(const Eigen::VectorXd& reduced) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dof_count()));
  for (std::size_t i = 0; i < reduced_index_.size(); ++i) {
    if (reduced_index_[i] >= 0) u(static_cast<Eigen::Index>(i)) = reduced(reduced_index_[i]);
  }
  return u;
}

Eigen::VectorXd TwinGirderModel::solve_static(const ThetaS& theta, const TruckLoad& truck,
                                              double position) const {
  truck.validate();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(assemble(theta));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("singular constrained stiffness system");
  }
  return expand(solver.solve(load_vector(truck, position)));
}

double TwinGirderModel::vertical_displacement(const Eigen::VectorXd& u, Girder g,
                                              double x) const {
  const std::size_t e = element_at(x);
  const auto& el = elements_[e];
  const double h = el.length;
  const double xi = x - node_x_[el.node];
  const double wi = u(static_cast<Eigen::Index>(dof(g, el.node, 0)));
  const double ti = u(static_cast<Eigen::Index>(dof(g, el.node, 1)));
  const double wj = u(static_cast<Eigen::Index>(dof(g, el.node + 1, 0)));
  const double tj = u(static_cast<Eigen::Index>(dof(g, el.node + 1, 1)));
  const double s = xi / h;
  const double n1 = 1.0 - 3 * s * s + 2 * s * s * s;
  const double n2 = xi * (1.0 - s) * (1.0 - s);
  const double n3 = 3 * s * s - 2 * s * s * s;
  const double n4 = xi * (s * s - s);
  return n1 * wi + n2 * ti + n3 * wj + n4 * tj;
}

double TwinGirderModel::bottom_fiber_stress_mpa(const Eigen::VectorXd& u, Girder g,
                                                double x) const {
  const std::size_t e = element_at(x);
  const auto& el = elements_[e];
  const double h = el.length;
  const double xi = x - node_x_[el.node];
  const double wi = u(static_cast<Eigen::Index>(dof(g, el.node, 0)));
  const double ti = u(static_cast<Eigen::Index>(dof(g, el.node, 1)));
  const double wj = u(static_cast<Eigen::Index>(dof(g, el.node + 1, 0)));
  const double tj = u(static_cast<Eigen::Index>(dof(g, el.node + 1, 1)));
  const double curvature = (-6.0 / (h * h) + 12.0 * xi / (h * h * h)) * wi +
                           (-4.0 / h + 6.0 * xi / (h * h)) * ti +
                           (6.0 / (h * h) - 12.0 * xi / (h * h * h)) * wj +
                           (-2.0 / h + 6.0 * xi / (h * h)) * tj;
  // Sagging gives tension at the bottom flange; w is downward positive.
  return -el.e_pa * el.c_m * curvature / 1e6;
}

Eigen::VectorXd TwinGirderModel::influence_line(const ThetaS& theta, const TruckLoad& truck,
                                                double sensor_x,
                                                const std::vector<double>& load_positions) const {
  truck.validate();
  for (std::size_t i = 1; i < load_positions.size(); ++i) {
    if (!(load_positions[i] > load_positions[i - 1])) {
      throw std::invalid_argument("load positions must be strictly increasing");
    }
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(assemble(theta));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("singular constrained stiffness system");
  }
  const Girder g = geometry_.instrumented_girder;
  Eigen::VectorXd out(static_cast<Eigen::Index>(load_positions.size()));
  for (std::size_t k = 0; k < load_positions.size(); ++k) {
    const Eigen::VectorXd u = expand(solver.solve(load_vector(truck, load_positions[k])));
    out(static_cast<Eigen::Index>(k)) = bottom_fiber_stress_mpa(u, g, sensor_x);
  }
  return out;
}

Eigen::VectorXd TwinGirderModel::response_grid(const ThetaS& theta,
                                               const std::vector<TruckLoad>& trucks,
                                               const SpaceTimeGrid& grid) const {
  if (trucks.empty()) throw std::invalid_argument("need at least one truck");
  for (const auto& t : trucks) t.validate();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(assemble(theta));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("singular constrained stiffness system");
  }
  const Girder g = geometry_.instrumented_girder;
  const auto nx = static_cast<Eigen::Index>(grid.n_x());
  const auto nt = static_cast<Eigen::Index>(grid.n_t());
  Eigen::VectorXd out(static_cast<Eigen::Index>(trucks.size()) * nt * nx);
  Eigen::Index off = 0;
  for (const auto& truck : trucks) {
    for (Eigen::Index k = 0; k < nt; ++k) {
      const Eigen::VectorXd u =
          expand(solver.solve(load_vector(truck, grid.t_coords()[static_cast<std::size_t>(k)])));
      for (Eigen::Index j = 0; j < nx; ++j) {
        out(off + k * nx + j) =
            bottom_fiber_stress_mpa(u, g, grid.x_coords()[static_cast<std::size_t>(j)]);
      }
    }
    off += nt * nx;
  }
  return out;
}

}  // namespace bsi
