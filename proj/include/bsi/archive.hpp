#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bsi/dataset.hpp"
#include "bsi/inference.hpp"

namespace bsi {

/// Self-contained record of one inference run: the weighted samples plus
/// enough context (model, parameter names, observation lattice) to
/// summarize or draw posterior predictives later.
struct RunArchive {
  std::string model;
  std::vector<std::string> param_names;
  NestedRun run;
  std::vector<double> grid_x;
  std::vector<double> grid_t;
  std::vector<Lane> lanes;
  std::string config_echo;  // JSON text of the config that produced the run

  std::string to_json() const;
  static RunArchive from_json(const std::string& text);
};

}  // namespace bsi
