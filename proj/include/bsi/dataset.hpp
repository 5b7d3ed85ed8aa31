#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bsi/beam.hpp"
#include "bsi/kernels.hpp"

namespace bsi {

/// Observations over one grid, one block per lane (blocks are treated as
/// independent repetitions of the space-time lattice).
struct Dataset {
  SpaceTimeGrid grid;
  std::vector<Lane> lanes;
  Eigen::VectorXd y_obs;  // lanes.size() * grid.size(), lane then time major

  std::size_t n_blocks() const { return lanes.size(); }
  std::size_t size() const { return lanes.size() * grid.size(); }
  void validate() const;
};

/// CSV with header sensor_x,t,lane,y_obs. The loader requires a complete
/// rectilinear lattice per lane and strictly increasing coordinates.
Dataset load_dataset_csv(const std::string& path);
std::string dataset_to_csv(const Dataset& data);

/// Indices of a hand-picked reference subset: per lane and sensor, the
/// `per_line` observations largest in magnitude, greedily subject to a
/// minimum spacing along the influence line.
std::vector<std::size_t> reference_subset(const Dataset& data, int per_line = 4,
                                          double min_separation_m = 20.0);

}  // namespace bsi
