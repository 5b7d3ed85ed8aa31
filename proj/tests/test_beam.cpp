#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsi/beam.hpp"
#include "bsi/study.hpp"

using namespace bsi;

namespace {

// Geometry with one 40 m span so the midspan lands exactly on a node.
BeamGeometry single_span() {
  BeamGeometry g;
  g.span_lengths_m = {40.0};
  g.sections = {SectionZone{1e300, 2.1e11, 1.0, 1.5}};
  return g;
}

ThetaS hinged() {
  ThetaS t;
  t.log10_kr = {-400.0, -400.0, -400.0, -400.0};  // 10^-400 underflows to zero
  t.log10_kv = -400.0;
  return t;
}

TruckLoad point_load(double p_kn, const BeamGeometry& g) {
  TruckLoad t;
  t.axle_offsets_m = {0.0};
  t.axle_loads_kn = {p_kn};
  t.lane = Lane::Right;
  t.z_m = g.girder_z(Girder::Right);  // all load on the instrumented girder
  return t;
}

}  // namespace

TEST_CASE("lateral load function anchors and linearity") {
  BeamGeometry g;
  const double zr = g.girder_z(Girder::Right);
  const double zl = g.girder_z(Girder::Left);
  auto [l1, r1] = lateral_load_function(zr, g);
  CHECK(l1 == doctest::Approx(0.0));
  CHECK(r1 == doctest::Approx(1.0));
  auto [l2, r2] = lateral_load_function(zl, g);
  CHECK(l2 == doctest::Approx(1.0));
  CHECK(r2 == doctest::Approx(0.0));
  auto [l3, r3] = lateral_load_function(0.0, g);
  CHECK(l3 == doctest::Approx(0.5));
  CHECK(r3 == doctest::Approx(0.5));
  auto [l4, r4] = lateral_load_function(0.5 * zr, g);  // halfway center-to-girder
  CHECK(l4 == doctest::Approx(0.25));
  CHECK(r4 == doctest::Approx(0.75));
  CHECK(l4 + r4 == doctest::Approx(1.0));
  CHECK_THROWS_AS(lateral_load_function(0.51 * g.deck_width_m, g), std::invalid_argument);
}

TEST_CASE("assembled stiffness is symmetric") {
  const TwinGirderModel model(BeamGeometry{});
  ThetaS theta;
  const Eigen::SparseMatrix<double> k = model.assemble(theta);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(k);
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero coupling stiffness decouples the girders") {
  const TwinGirderModel model(single_span());
  ThetaS theta = hinged();
  const Eigen::MatrixXd k = Eigen::MatrixXd(model.assemble(theta));
  // With both girders carrying the same reduced dof count, the
  // cross-girder off-diagonal block must vanish.
  const Eigen::Index half = k.rows() / 2;
  CHECK(k.block(0, half, half, half).cwiseAbs().maxCoeff() == 0.0);

  // A load on the right lane then leaves the left girder unloaded.
  const Eigen::VectorXd u =
      model.solve_static(theta, point_load(100.0, model.geometry()), 20.0);
  CHECK(model.vertical_displacement(u, Girder::Left, 20.0) == doctest::Approx(0.0));
  CHECK(model.vertical_displacement(u, Girder::Right, 20.0) > 1e-6);
}

TEST_CASE("simply supported closed forms: deflection and peak stress") {
  const BeamGeometry g = single_span();
  const TwinGirderModel model(g);
  const ThetaS theta = hinged();
  const double p = 150.0;  // kN
  const double span = 40.0;
  const Eigen::VectorXd u = model.solve_static(theta, point_load(p, g), 0.5 * span);

  const double e_kn = 2.1e11 / 1e3;
  const double expected_w = p * span * span * span / (48.0 * e_kn * 1.0);
  const double w = model.vertical_displacement(u, Girder::Right, 0.5 * span);
  CHECK(w == doctest::Approx(expected_w).epsilon(1e-9));

  // Peak moment P L / 4 -> bottom-fiber stress M c / I, reported in MPa.
  const double expected_stress = (p * span / 4.0) * 1.5 / 1.0 * 1e3 / 1e6;
  const double stress = model.bottom_fiber_stress_mpa(u, Girder::Right, 0.5 * span);
  CHECK(stress == doctest::Approx(expected_stress).epsilon(1e-9));

  const Eigen::VectorXd line =
      model.influence_line(theta, point_load(p, g), 0.5 * span, {10.0, 20.0, 30.0});
  CHECK(line(1) == doctest::Approx(expected_stress).epsilon(1e-9));
}

TEST_CASE("near-rigid rotational springs approach the clamped limit") {
  // Softer girder (I = 0.8) so the 1e10 kNm/rad springs are > 1000x the
  // beam's own rotational stiffness 2EI/L.
  BeamGeometry g = single_span();
  g.sections = {SectionZone{1e300, 2.1e11, 0.8, 1.5}};
  const TwinGirderModel model(g);
  const TruckLoad load = point_load(100.0, g);

  ThetaS pinned = hinged();
  ThetaS clamped = hinged();
  clamped.log10_kr = {10.0, 10.0, 10.0, 10.0};

  const Eigen::VectorXd u_pin = model.solve_static(pinned, load, 20.0);
  const Eigen::VectorXd u_rig = model.solve_static(clamped, load, 20.0);
  // End rotation of the loaded (right) girder drops by orders of magnitude.
  const auto n_nodes = static_cast<Eigen::Index>(model.node_positions().size());
  const Eigen::Index rot_dof = n_nodes * 2 + 1;  // right girder, first node, rotation
  const double rot_pin = std::abs(u_pin(rot_dof));
  const double rot_rig = std::abs(u_rig(rot_dof));
  REQUIRE(rot_pin > 0.0);
  CHECK(rot_rig <= 1e-3 * rot_pin);

  // Clamped midspan deflection P L^3 / (192 E I); the 1e10 springs leave
  // a ~0.3% residual end flexibility.
  const double e_kn = 2.1e11 / 1e3;
  const double expected = 100.0 * std::pow(40.0, 3) / (192.0 * e_kn * 0.8);
  CHECK(model.vertical_displacement(u_rig, Girder::Right, 20.0) ==
        doctest::Approx(expected).epsilon(5e-3));
}

TEST_CASE("zero load gives zero stress, doubling loads doubles stress") {
  const BeamGeometry g;  // five spans
  const TwinGirderModel model(g);
  ThetaS theta;
  TruckLoad truck = TruckLoad::default_truck(Lane::Right, g);
  const std::vector<double> positions{30.0, 80.0, 150.0, 220.0};

  TruckLoad doubled = truck;
  for (auto& p : doubled.axle_loads_kn) p *= 2.0;
  const Eigen::VectorXd one = model.influence_line(theta, truck, 100.0, positions);
  const Eigen::VectorXd two = model.influence_line(theta, doubled, 100.0, positions);
  CHECK((two - 2.0 * one).cwiseAbs().maxCoeff() <= 1e-12 * two.cwiseAbs().maxCoeff());

  // Truck fully off the bridge: every axle is ignored, nothing deflects.
  const Eigen::VectorXd u = model.solve_static(theta, truck, -50.0);
  CHECK(model.bottom_fiber_stress_mpa(u, Girder::Right, 100.0) == 0.0);
  CHECK(u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetric bridge gives mirror-symmetric influence lines") {
  // The coupling stations at k * 5.4 m are not mirror symmetric, so the
  // girders are decoupled for this check.
  BeamGeometry g;
  g.span_lengths_m = {40.0, 40.0};
  const TwinGirderModel model(g);
  ThetaS theta;
  theta.log10_kr = {6.0, 6.0, 6.0, 6.0};
  theta.log10_kv = -400.0;

  TruckLoad axle = point_load(120.0, g);
  const double total = 80.0;
  // Node-aligned positions: midway positions would lump by tie-breaking,
  // which is deterministic but not mirror-equivariant.
  std::vector<double> pos, pos_mirror;
  for (int i = 1; i < 20; ++i) pos.push_back(4.0 * i);
  for (int i = 19; i >= 1; --i) pos_mirror.push_back(total - 4.0 * i);

  const Eigen::VectorXd a = model.influence_line(theta, axle, 15.0, pos);
  const Eigen::VectorXd b = model.influence_line(theta, axle, total - 15.0, pos_mirror);
  CHECK((a - b.reverse()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("stiffer support springs never raise the adjacent sagging peak") {
  const BeamGeometry g;
  const TwinGirderModel model(g);
  const TruckLoad truck = TruckLoad::default_truck(Lane::Right, g);
  std::vector<double> positions;
  for (int i = 1; i <= 60; ++i) positions.push_back(295.0 * i / 61.0);
  double prev_peak = std::numeric_limits<double>::infinity();
  for (int step = 0; step <= 10; ++step) {
    ThetaS theta = hinged();
    theta.log10_kr[0] = 4.0 + 0.6 * step;  // sweep the first support spring
    const Eigen::VectorXd line = model.influence_line(theta, truck, 22.5, positions);
    const double peak = line.maxCoeff();
    CHECK(peak <= prev_peak * (1.0 + 1e-12));
    prev_peak = peak;
  }
}

TEST_CASE("mesh convergence at the default element length") {
  BeamGeometry coarse;
  BeamGeometry fine;
  fine.max_element_length_m = 1.0;
  const TwinGirderModel mc(coarse);
  const TwinGirderModel mf(fine);
  ThetaS theta;
  const TruckLoad truck = TruckLoad::default_truck(Lane::Right, coarse);
  std::vector<double> positions;
  for (int i = 1; i <= 100; ++i) positions.push_back(295.0 * i / 101.0);
  const double sensor = 147.5;  // middle of the long span
  const double peak_c =
      mc.influence_line(theta, truck, sensor, positions).cwiseAbs().maxCoeff();
  const double peak_f =
      mf.influence_line(theta, truck, sensor, positions).cwiseAbs().maxCoeff();
  CHECK(std::abs(peak_f - peak_c) / peak_f < 0.01);
}

TEST_CASE("response_grid stacks influence lines in block time-major order") {
  const BeamGeometry g;
  const TwinGirderModel model(g);
  ThetaS theta;
  const SpaceTimeGrid grid = make_sensor_grid(1, 4, g);
  const auto trucks = default_trucks({Lane::Left, Lane::Right}, g);
  const Eigen::VectorXd y = model.response_grid(theta, trucks, grid);
  REQUIRE(y.size() == static_cast<Eigen::Index>(2 * grid.size()));

  for (std::size_t lane = 0; lane < 2; ++lane) {
    for (std::size_t j = 0; j < grid.n_x(); ++j) {
      const Eigen::VectorXd line = model.influence_line(
          theta, trucks[lane], grid.x_coords()[j],
          std::vector<double>(grid.t_coords().begin(), grid.t_coords().end()));
      for (std::size_t k = 0; k < grid.n_t(); ++k) {
        const auto idx =
            static_cast<Eigen::Index>(lane * grid.size() + grid.index(k, j));
        CHECK(y(idx) == doctest::Approx(line(static_cast<Eigen::Index>(k))).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("make_sensor_grid follows the spacing rule") {
  BeamGeometry g;
  g.span_lengths_m = {45.0};
  const SpaceTimeGrid one = make_sensor_grid(1, 3, g);
  CHECK(one.x_coords() == std::vector<double>{22.5});
  const SpaceTimeGrid two = make_sensor_grid(2, 3, g);
  CHECK(two.x_coords()[0] == doctest::Approx(15.0));
  CHECK(two.x_coords()[1] == doctest::Approx(30.0));

  BeamGeometry five;  // default five spans
  const SpaceTimeGrid grid = make_sensor_grid(2, 7, five);
  CHECK(grid.n_x() == 10);  // two per span
  CHECK(grid.n_t() == 7);
  CHECK(grid.size() == 70);
}

TEST_CASE("geometry validation") {
  BeamGeometry g;
  g.span_lengths_m = {};
  CHECK_THROWS_AS(TwinGirderModel{g}, std::invalid_argument);
  BeamGeometry g2;
  g2.sections = {SectionZone{10.0}};  // does not cover the bridge
  CHECK_THROWS_AS(TwinGirderModel{g2}, std::invalid_argument);
  BeamGeometry g3;
  g3.deck_width_m = 1.0;  // narrower than the girder spacing
  CHECK_THROWS_AS(TwinGirderModel{g3}, std::invalid_argument);
}
