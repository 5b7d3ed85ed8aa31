#include "bsi/archive.hpp"

#include <cmath>
#include <json.hpp>
#include <limits>
#include <stdexcept>

namespace bsi {

namespace {

using nlohmann::json;

// JSON has no +-inf; -inf log values round-trip as null.
json log_num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double log_num_from(const json& j) {
  if (j.is_null()) return -std::numeric_limits<double>::infinity();
  return j.get<double>();
}

json samples_to_json(const NestedRun& run) {
  json theta = json::array();
  json logl = json::array();
  json logw = json::array();
  for (const auto& s : run.samples) {
    json row = json::array();
    for (Eigen::Index i = 0; i < s.theta.size(); ++i) row.push_back(s.theta(i));
    theta.push_back(std::move(row));
    logl.push_back(log_num(s.loglik));
    logw.push_back(log_num(s.logweight));
  }
  return json{{"theta", std::move(theta)}, {"loglik", std::move(logl)},
              {"logweight", std::move(logw)}};
}

}  // namespace

std::string RunArchive::to_json() const {
  json lanes_j = json::array();
  for (Lane l : lanes) lanes_j.push_back(to_string(l));
  const json j{
      {"schema_version", 1},
      {"kind", "nested_run"},
      {"model", model},
      {"param_names", param_names},
      {"logz", run.logz},
      {"logz_err", run.logz_err},
      {"information", run.information},
      {"nfe", run.nfe},
      {"n_live", run.n_live},
      {"workers", run.workers},
      {"seed", run.seed},
      {"termination", run.termination},
      {"low_acceptance_warning", run.low_acceptance_warning},
      {"samples", samples_to_json(run)},
      {"grid_x", grid_x},
      {"grid_t", grid_t},
      {"lanes", std::move(lanes_j)},
      {"config_echo",
       config_echo.empty() ? json(nullptr) : json::parse(config_echo)},
  };
  return j.dump(2) + "\n";
}

RunArchive RunArchive::from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("kind", "") != "nested_run" || j.value("schema_version", 0) != 1) {
    throw std::runtime_error("not a nested_run archive (or unsupported schema version)");
  }
  RunArchive a;
  a.model = j.at("model").get<std::string>();
  a.param_names = j.at("param_names").get<std::vector<std::string>>();
  a.grid_x = j.at("grid_x").get<std::vector<double>>();
  a.grid_t = j.at("grid_t").get<std::vector<double>>();
  for (const auto& l : j.at("lanes")) a.lanes.push_back(lane_from_string(l.get<std::string>()));
  if (j.contains("config_echo") && !j["config_echo"].is_null()) {
    a.config_echo = j["config_echo"].dump(2) + "\n";
  }
  a.run.logz = j.at("logz").get<double>();
  a.run.logz_err = j.at("logz_err").get<double>();
  a.run.information = j.at("information").get<double>();
  a.run.nfe = j.at("nfe").get<std::int64_t>();
  a.run.n_live = j.at("n_live").get<int>();
  a.run.workers = j.at("workers").get<int>();
  a.run.seed = j.at("seed").get<std::uint64_t>();
  a.run.termination = j.at("termination").get<std::string>();
  a.run.low_acceptance_warning = j.at("low_acceptance_warning").get<bool>();
  const auto& s = j.at("samples");
  const auto& theta = s.at("theta");
  const auto& logl = s.at("loglik");
  const auto& logw = s.at("logweight");
  if (theta.size() != logl.size() || theta.size() != logw.size()) {
    throw std::runtime_error("inconsistent sample arrays in archive");
  }
  a.run.samples.resize(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto& row = theta[i];
    Eigen::VectorXd t(static_cast<Eigen::Index>(row.size()));
    for (std::size_t k = 0; k < row.size(); ++k) {
      t(static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
    a.run.samples[i] = {std::move(t), log_num_from(logl[i]), log_num_from(logw[i])};
  }
  return a;
}

}  // namespace bsi
