#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "bsi/beam.hpp"
#include "bsi/inference.hpp"
#include "bsi/models.hpp"
#include "bsi/rng.hpp"

namespace bsi {

/// Sensor/load lattice for a synthetic study: n_x sensors equally spaced
/// inside each span (at k * L_span / (n_x + 1)) and n_t load positions
/// equally spaced along the whole bridge.
SpaceTimeGrid make_sensor_grid(int n_x_per_span, int n_t, const BeamGeometry& geometry);

/// One draw of contaminated observations: y_model plus correlated noise
/// from the probabilistic model. Dense Cholesky sampling below the cap,
/// Kronecker-factor sampling above it. Reproducible for a fixed seed.
Eigen::VectorXd sample_synthetic(const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                                 const Eigen::VectorXd& y_model, std::uint64_t seed,
                                 std::size_t dense_cap = kDenseCapDefault);

/// In-place variant drawing from an existing stream.
Eigen::VectorXd sample_synthetic(const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                                 const Eigen::VectorXd& y_model, Rng& rng,
                                 std::size_t dense_cap = kDenseCapDefault);

struct StudyConfig {
  std::vector<int> grid_sizes{1, 2, 3, 5, 8};  // n_x per span = n_t
  std::string ground_truth_model = "EXP-A";
  ParamValues ground_truth;
  std::vector<std::string> pool{"IID-M", "EXP-M", "IID-A", "EXP-A"};
  int replicates = 10;
  std::uint64_t seed = 0;
  NestedConfig sampler{/*n_live=*/150, /*dlogz=*/0.01, /*walk_steps=*/15};
  BeamGeometry geometry;
  std::vector<Lane> lanes{Lane::Left, Lane::Right};
  PriorOverrides priors;

  void validate() const;
};

struct StudyCell {
  int grid = 0;
  std::size_t n_points = 0;
  std::string model;
  bool is_ground_truth = false;
  int replicates_ok = 0;
  double mean_logz = 0.0;
  double log_mean_evidence = 0.0;  // logsumexp of per-replicate logZ minus log count
  double posterior_prob = 0.0;     // from the per-grid mean evidences
};

struct MapStat {
  std::string parameter;
  double truth = 0.0;
  double mean_map = 0.0;
  double rel_error = 0.0;  // |mean_map - truth| / |truth|
  double cov = 0.0;        // scatter of MAP estimates across replicates
};

struct StudyGridSummary {
  int grid = 0;
  std::size_t n_points = 0;
  double p_gt = 0.0;
  double accuracy = 0.0;  // fraction of replicates where the truth wins
  int failures = 0;
  std::vector<MapStat> map_stats;  // ground-truth model parameters only
};

struct StudyReport {
  std::vector<StudyCell> cells;
  std::vector<StudyGridSummary> grids;
};

/// Full synthetic identification study: per grid size and replicate,
/// draw a dataset from the ground truth, infer every pool model on it,
/// then aggregate evidences, identification accuracy and MAP errors.
/// Cells run on `workers` threads; results are independent of the
/// schedule because every cell derives its own seed.
StudyReport run_study(const StudyConfig& config, int workers = 1);

/// Posterior predictive draws: resample theta from the weighted run,
/// evaluate the physical model, then add one draw of the probabilistic
/// error. Returns n_draws rows of length lanes * grid size.
Eigen::MatrixXd posterior_predictive(const NestedRun& run, const ModelDef& model,
                                     const TwinGirderModel& fe,
                                     const std::vector<TruckLoad>& trucks,
                                     const SpaceTimeGrid& grid, std::size_t n_draws,
                                     std::uint64_t seed,
                                     std::size_t dense_cap = kDenseCapDefault);

/// Trucks for the requested lanes, placed on their girder lines.
std::vector<TruckLoad> default_trucks(const std::vector<Lane>& lanes,
                                      const BeamGeometry& geometry);

}  // namespace bsi
