#include "bsi/config.hpp"

#include <json.hpp>
#include <set>
#include <stdexcept>

#include "bsi/io.hpp"

namespace bsi {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::runtime_error("config error at " + where + ": " + what);
}

void expect_keys(const json& j, const std::string& where,
                 const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) fail(where, "unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const std::string& where, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      fail(where + "." + key, "wrong type");
    }
  }
}

Lane parse_lane(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "lane must be a string");
  try {
    return lane_from_string(j.get<std::string>());
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
}

void read_lanes(const json& j, const std::string& where, std::vector<Lane>& out) {
  if (const auto it = j.find("lanes"); it != j.end()) {
    if (!it->is_array() || it->empty()) fail(where + ".lanes", "expected a non-empty array");
    out.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      out.push_back(parse_lane((*it)[i], where + ".lanes"));
    }
  }
}

void parse_geometry(const json& j, const std::string& where, BeamGeometry& g) {
  expect_keys(j, where,
              {"span_lengths_m", "sections", "max_element_length_m", "coupling_spacing_m",
               "girder_spacing_m", "deck_width_m", "instrumented_girder"});
  read(j, where, "span_lengths_m", g.span_lengths_m);
  read(j, where, "max_element_length_m", g.max_element_length_m);
  read(j, where, "coupling_spacing_m", g.coupling_spacing_m);
  read(j, where, "girder_spacing_m", g.girder_spacing_m);
  read(j, where, "deck_width_m", g.deck_width_m);
  if (const auto it = j.find("instrumented_girder"); it != j.end()) {
    const std::string s = it->get<std::string>();
    if (s == "left") {
      g.instrumented_girder = Girder::Left;
    } else if (s == "right") {
      g.instrumented_girder = Girder::Right;
    } else {
      fail(where + ".instrumented_girder", "expected left or right");
    }
  }
  if (const auto it = j.find("sections"); it != j.end()) {
    if (!it->is_array() || it->empty()) fail(where + ".sections", "expected a non-empty array");
    g.sections.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& sj = (*it)[i];
      const std::string sw = where + ".sections[" + std::to_string(i) + "]";
      expect_keys(sj, sw,
                  {"until_x_m", "youngs_modulus_pa", "second_moment_m4", "bottom_fiber_m"});
      SectionZone z;
      if (!sj.contains("until_x_m")) fail(sw, "missing until_x_m");
      read(sj, sw, "until_x_m", z.until_x_m);
      read(sj, sw, "youngs_modulus_pa", z.youngs_modulus_pa);
      read(sj, sw, "second_moment_m4", z.second_moment_m4);
      read(sj, sw, "bottom_fiber_m", z.bottom_fiber_m);
      g.sections.push_back(z);
    }
  }
}

void parse_param_values(const json& j, const std::string& where, ParamValues& v) {
  expect_keys(j, where,
              {"log10_Kr_1", "log10_Kr_2", "log10_Kr_3", "log10_Kr_4", "log10_Kv", "C_v",
               "sigma_model", "sigma_meas", "l_corr_t", "l_corr_x"});
  read(j, where, "log10_Kr_1", v.theta_s.log10_kr[0]);
  read(j, where, "log10_Kr_2", v.theta_s.log10_kr[1]);
  read(j, where, "log10_Kr_3", v.theta_s.log10_kr[2]);
  read(j, where, "log10_Kr_4", v.theta_s.log10_kr[3]);
  read(j, where, "log10_Kv", v.theta_s.log10_kv);
  read(j, where, "C_v", v.c_v);
  read(j, where, "sigma_model", v.sigma_model);
  read(j, where, "sigma_meas", v.sigma_meas);
  read(j, where, "l_corr_t", v.l_corr_t);
  read(j, where, "l_corr_x", v.l_corr_x);
}

void parse_sampler(const json& j, const std::string& where, NestedConfig& s) {
  expect_keys(j, where, {"n_live", "dlogz", "walk_steps", "seed", "max_iterations"});
  read(j, where, "n_live", s.n_live);
  read(j, where, "dlogz", s.dlogz);
  read(j, where, "walk_steps", s.walk_steps);
  read(j, where, "seed", s.seed);
  read(j, where, "max_iterations", s.max_iterations);
}

json param_values_to_json(const ParamValues& v) {
  return json{{"log10_Kr_1", v.theta_s.log10_kr[0]}, {"log10_Kr_2", v.theta_s.log10_kr[1]},
              {"log10_Kr_3", v.theta_s.log10_kr[2]}, {"log10_Kr_4", v.theta_s.log10_kr[3]},
              {"log10_Kv", v.theta_s.log10_kv},      {"C_v", v.c_v},
              {"sigma_model", v.sigma_model},        {"sigma_meas", v.sigma_meas},
              {"l_corr_t", v.l_corr_t},              {"l_corr_x", v.l_corr_x}};
}

json lanes_to_json(const std::vector<Lane>& lanes) {
  json out = json::array();
  for (Lane l : lanes) out.push_back(to_string(l));
  return out;
}

}  // namespace

TruckLoad TruckSettings::build(Lane lane, const BeamGeometry& geometry) const {
  if (axle_loads_kn.size() != axle_spacings_m.size() + 1) {
    throw std::runtime_error(
        "truck needs one more axle load than axle spacings (loads: " +
        std::to_string(axle_loads_kn.size()) +
        ", spacings: " + std::to_string(axle_spacings_m.size()) + ")");
  }
  TruckLoad t;
  t.axle_offsets_m.push_back(0.0);
  for (double s : axle_spacings_m) t.axle_offsets_m.push_back(t.axle_offsets_m.back() + s);
  t.axle_loads_kn = axle_loads_kn;
  t.lane = lane;
  if (lane == Lane::Left) {
    t.z_m = z_left_m.value_or(geometry.girder_z(Girder::Left));
  } else {
    t.z_m = z_right_m.value_or(geometry.girder_z(Girder::Right));
  }
  t.validate();
  return t;
}

std::vector<TruckLoad> RunConfig::trucks() const {
  std::vector<TruckLoad> out;
  for (Lane l : grid.lanes) out.push_back(truck.build(l, geometry));
  return out;
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
  }
  expect_keys(j, "$",
              {"schema_version", "geometry", "truck", "grid", "model", "models", "priors",
               "sampler", "dataset_csv", "synthetic", "study", "bench", "sweep", "predict",
               "output_dir"});
  RunConfig cfg;
  if (!j.contains("schema_version")) fail("$", "missing schema_version");
  read(j, "$", "schema_version", cfg.schema_version);
  if (cfg.schema_version != 1) fail("$.schema_version", "unsupported version");

  if (j.contains("geometry")) parse_geometry(j["geometry"], "$.geometry", cfg.geometry);
  if (j.contains("truck")) {
    const auto& tj = j["truck"];
    expect_keys(tj, "$.truck", {"axle_spacings_m", "axle_loads_kn", "z_left_m", "z_right_m"});
    read(tj, "$.truck", "axle_spacings_m", cfg.truck.axle_spacings_m);
    read(tj, "$.truck", "axle_loads_kn", cfg.truck.axle_loads_kn);
    if (tj.contains("z_left_m")) cfg.truck.z_left_m = tj["z_left_m"].get<double>();
    if (tj.contains("z_right_m")) cfg.truck.z_right_m = tj["z_right_m"].get<double>();
  }
  if (j.contains("grid")) {
    const auto& gj = j["grid"];
    expect_keys(gj, "$.grid", {"sensors_per_span", "load_positions", "lanes"});
    read(gj, "$.grid", "sensors_per_span", cfg.grid.sensors_per_span);
    read(gj, "$.grid", "load_positions", cfg.grid.load_positions);
    read_lanes(gj, "$.grid", cfg.grid.lanes);
  }
  read(j, "$", "model", cfg.model);
  read(j, "$", "models", cfg.models);
  if (j.contains("priors")) {
    if (!j["priors"].is_object()) fail("$.priors", "expected an object");
    for (const auto& [key, val] : j["priors"].items()) {
      if (!val.is_array() || val.size() != 2) {
        fail("$.priors." + key, "expected [lower, upper]");
      }
      cfg.priors[key] = {val[0].get<double>(), val[1].get<double>()};
    }
  }
  if (j.contains("sampler")) parse_sampler(j["sampler"], "$.sampler", cfg.sampler);
  if (j.contains("dataset_csv")) cfg.dataset_csv = j["dataset_csv"].get<std::string>();
  if (j.contains("synthetic")) {
    const auto& sj = j["synthetic"];
    expect_keys(sj, "$.synthetic", {"model", "theta", "seed"});
    SyntheticSettings s;
    read(sj, "$.synthetic", "model", s.model);
    read(sj, "$.synthetic", "seed", s.seed);
    if (sj.contains("theta")) parse_param_values(sj["theta"], "$.synthetic.theta", s.theta);
    cfg.synthetic = s;
  }
  if (j.contains("study")) {
    const auto& sj = j["study"];
    expect_keys(sj, "$.study",
                {"grid_sizes", "replicates", "ground_truth_model", "ground_truth", "pool"});
    read(sj, "$.study", "grid_sizes", cfg.study.grid_sizes);
    read(sj, "$.study", "replicates", cfg.study.replicates);
    read(sj, "$.study", "ground_truth_model", cfg.study.ground_truth_model);
    read(sj, "$.study", "pool", cfg.study.pool);
    if (sj.contains("ground_truth")) {
      parse_param_values(sj["ground_truth"], "$.study.ground_truth", cfg.study.ground_truth);
    }
  }
  if (j.contains("bench")) {
    const auto& bj = j["bench"];
    expect_keys(bj, "$.bench", {"sizes", "sensors", "repeats"});
    read(bj, "$.bench", "sizes", cfg.bench.sizes);
    read(bj, "$.bench", "sensors", cfg.bench.sensors);
    read(bj, "$.bench", "repeats", cfg.bench.repeats);
  }
  if (j.contains("sweep")) {
    const auto& sj = j["sweep"];
    expect_keys(sj, "$.sweep", {"parameter", "points", "sensors_x", "lane"});
    read(sj, "$.sweep", "parameter", cfg.sweep.parameter);
    read(sj, "$.sweep", "points", cfg.sweep.points);
    read(sj, "$.sweep", "sensors_x", cfg.sweep.sensors_x);
    if (sj.contains("lane")) cfg.sweep.lane = parse_lane(sj["lane"], "$.sweep.lane");
  }
  if (j.contains("predict")) {
    const auto& pj = j["predict"];
    expect_keys(pj, "$.predict", {"archive", "n_draws", "seed"});
    read(pj, "$.predict", "archive", cfg.predict.archive);
    read(pj, "$.predict", "n_draws", cfg.predict.n_draws);
    read(pj, "$.predict", "seed", cfg.predict.seed);
  }
  read(j, "$", "output_dir", cfg.output_dir);
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

std::string config_to_json(const RunConfig& c) {
  json sections = json::array();
  for (const auto& z : c.geometry.sections) {
    sections.push_back(json{{"until_x_m", z.until_x_m},
                            {"youngs_modulus_pa", z.youngs_modulus_pa},
                            {"second_moment_m4", z.second_moment_m4},
                            {"bottom_fiber_m", z.bottom_fiber_m}});
  }
  json truck{{"axle_spacings_m", c.truck.axle_spacings_m},
             {"axle_loads_kn", c.truck.axle_loads_kn}};
  if (c.truck.z_left_m) truck["z_left_m"] = *c.truck.z_left_m;
  if (c.truck.z_right_m) truck["z_right_m"] = *c.truck.z_right_m;
  json priors = json::object();
  for (const auto& [name, bounds] : c.priors) {
    priors[name] = json::array({bounds.first, bounds.second});
  }
  json j{
      {"schema_version", c.schema_version},
      {"geometry",
       {{"span_lengths_m", c.geometry.span_lengths_m},
        {"sections", std::move(sections)},
        {"max_element_length_m", c.geometry.max_element_length_m},
        {"coupling_spacing_m", c.geometry.coupling_spacing_m},
        {"girder_spacing_m", c.geometry.girder_spacing_m},
        {"deck_width_m", c.geometry.deck_width_m},
        {"instrumented_girder",
         c.geometry.instrumented_girder == Girder::Left ? "left" : "right"}}},
      {"truck", std::move(truck)},
      {"grid",
       {{"sensors_per_span", c.grid.sensors_per_span},
        {"load_positions", c.grid.load_positions},
        {"lanes", lanes_to_json(c.grid.lanes)}}},
      {"model", c.model},
      {"models", c.models},
      {"priors", std::move(priors)},
      {"sampler",
       {{"n_live", c.sampler.n_live},
        {"dlogz", c.sampler.dlogz},
        {"walk_steps", c.sampler.walk_steps},
        {"seed", c.sampler.seed},
        {"max_iterations", c.sampler.max_iterations}}},
      {"study",
       {{"grid_sizes", c.study.grid_sizes},
        {"replicates", c.study.replicates},
        {"ground_truth_model", c.study.ground_truth_model},
        {"ground_truth", param_values_to_json(c.study.ground_truth)},
        {"pool", c.study.pool}}},
      {"bench",
       {{"sizes", c.bench.sizes}, {"sensors", c.bench.sensors}, {"repeats", c.bench.repeats}}},
      {"sweep",
       {{"parameter", c.sweep.parameter},
        {"points", c.sweep.points},
        {"sensors_x", c.sweep.sensors_x},
        {"lane", to_string(c.sweep.lane)}}},
      {"predict",
       {{"archive", c.predict.archive},
        {"n_draws", c.predict.n_draws},
        {"seed", c.predict.seed}}},
      {"output_dir", c.output_dir},
  };
  if (c.dataset_csv) j["dataset_csv"] = *c.dataset_csv;
  if (c.synthetic) {
    j["synthetic"] = json{{"model", c.synthetic->model},
                          {"theta", param_values_to_json(c.synthetic->theta)},
                          {"seed", c.synthetic->seed}};
  }
  return j.dump(2) + "\n";
}

}  // namespace bsi
