#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsi/beam.hpp"
#include "bsi/models.hpp"
#include "bsi/study.hpp"

namespace bsi {

struct GridSettings {
  int sensors_per_span = 2;
  int load_positions = 10;
  std::vector<Lane> lanes{Lane::Left, Lane::Right};
};

struct TruckSettings {
  std::vector<double> axle_spacings_m{2.06, 1.83, 1.82, 1.82};
  std::vector<double> axle_loads_kn{59.35, 108.82, 108.82, 108.82, 108.82};
  std::optional<double> z_left_m;   // default: on the girder line
  std::optional<double> z_right_m;

  TruckLoad build(Lane lane, const BeamGeometry& geometry) const;
};

struct SyntheticSettings {
  std::string model = "EXP-A";
  ParamValues theta;
  std::uint64_t seed = 1;
};

struct StudySettings {
  std::vector<int> grid_sizes{1, 2, 3, 5, 8};
  int replicates = 10;
  std::string ground_truth_model = "EXP-A";
  ParamValues ground_truth;
  std::vector<std::string> pool{"IID-M", "EXP-M", "IID-A", "EXP-A"};
};

struct BenchSettings {
  std::vector<int> sizes{64, 256, 1024};  // total grid points per block
  int sensors = 4;
  int repeats = 5;
};

struct SweepSettings {
  std::string parameter = "log10_Kv";
  int points = 10;
  std::vector<double> sensors_x;  // empty: one sensor per span midpoint
  Lane lane = Lane::Right;
};

struct PredictSettings {
  std::string archive;
  int n_draws = 200;
  std::uint64_t seed = 1;
};

/// One config file drives every subcommand; each command reads the
/// sections it needs. Unknown keys anywhere are rejected up front.
struct RunConfig {
  int schema_version = 1;
  BeamGeometry geometry;
  TruckSettings truck;
  GridSettings grid;
  std::string model = "EXP-A";             // infer
  std::vector<std::string> models;         // select pool
  PriorOverrides priors;
  NestedConfig sampler;
  std::optional<std::string> dataset_csv;
  std::optional<SyntheticSettings> synthetic;
  StudySettings study;
  BenchSettings bench;
  SweepSettings sweep;
  PredictSettings predict;
  std::string output_dir = "out";

  std::vector<TruckLoad> trucks() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& config);

}  // namespace bsi
