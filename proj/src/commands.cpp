#include "bsi/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <thread>

#include "bsi/archive.hpp"
#include "bsi/dataset.hpp"
#include "bsi/io.hpp"
#include "bsi/likelihood.hpp"
#include "bsi/structured.hpp"
#include "bsi/study.hpp"

namespace bsi {

namespace {

using nlohmann::json;

std::string out_path(const RunConfig& cfg, const CliOptions& opts, const std::string& name) {
  const std::string dir = opts.out_dir.value_or(cfg.output_dir);
  return (std::filesystem::path(dir) / name).string();
}

RunConfig with_seed_override(RunConfig cfg, const CliOptions& opts) {
  if (opts.seed) {
    cfg.sampler.seed = *opts.seed;
    if (cfg.synthetic) cfg.synthetic->seed = *opts.seed;
    cfg.predict.seed = *opts.seed;
  }
  return cfg;
}

/// Dataset from the configured CSV, or freshly contaminated synthetic
/// observations on the configured grid.
Dataset build_dataset(const RunConfig& cfg, const TwinGirderModel& fe) {
  if (cfg.dataset_csv) {
    Dataset d = load_dataset_csv(*cfg.dataset_csv);
    d.validate();
    return d;
  }
  if (!cfg.synthetic) {
    throw std::runtime_error(
        "config must provide either dataset_csv or a synthetic block");
  }
  const auto& syn = *cfg.synthetic;
  const ModelDef def = ModelDef::parse(syn.model);
  const ProbModelSpec spec = syn.theta.prob_spec(def);
  const SpaceTimeGrid grid =
      make_sensor_grid(cfg.grid.sensors_per_span, cfg.grid.load_positions, cfg.geometry);
  const auto trucks = cfg.trucks();
  const Eigen::VectorXd y_true = fe.response_grid(syn.theta.theta_s, trucks, grid);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd y_obs(y_true.size());
  for (std::size_t lane = 0; lane < trucks.size(); ++lane) {
    const auto off = static_cast<Eigen::Index>(lane) * n;
    y_obs.segment(off, n) = sample_synthetic(spec, grid, y_true.segment(off, n),
                                             mix_seed(syn.seed, 40 + lane));
  }
  return Dataset{grid, cfg.grid.lanes, std::move(y_obs)};
}

double diag_gaussian_loglik(const Eigen::VectorXd& r, const Eigen::VectorXd& var) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!(var(i) > 0.0)) {
      throw NotPositiveDefiniteError("zero variance in diagonal likelihood");
    }
    out += std::log(2.0 * std::numbers::pi * var(i)) + r(i) * r(i) / var(i);
  }
  return -0.5 * out;
}

/// Likelihood of a model on the dataset. Reference models score only the
/// hand-picked subset, under independence.
LoglikFn make_loglik(const ModelDef& def, const TwinGirderModel& fe,
                     const std::vector<TruckLoad>& trucks, const Dataset& data,
                     std::vector<std::size_t> subset) {
  if (!def.reference) {
    return [&def, &fe, &trucks, &data](const Eigen::VectorXd& theta) {
      const Eigen::VectorXd y_model = fe.response_grid(def.theta_s(theta), trucks, data.grid);
      return loglik_blocks(data.y_obs, y_model, def.prob_spec(theta), data.grid,
                           data.n_blocks())
          .value;
    };
  }
  return [&def, &fe, &trucks, &data, subset = std::move(subset)](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd y_model = fe.response_grid(def.theta_s(theta), trucks, data.grid);
    const ProbModelSpec spec = def.prob_spec(theta);
    const auto n = static_cast<Eigen::Index>(subset.size());
    Eigen::VectorXd r(n), var(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto idx = static_cast<Eigen::Index>(subset[static_cast<std::size_t>(i)]);
      r(i) = data.y_obs(idx) - y_model(idx);
      const double noise = spec.sigma_meas * spec.sigma_meas;
      if (spec.error_structure == ErrorStructure::Multiplicative) {
        var(i) = spec.c_v * spec.c_v * y_model(idx) * y_model(idx) + noise;
      } else {
        var(i) = spec.sigma_model * spec.sigma_model + noise;
      }
    }
    return diag_gaussian_loglik(r, var);
  };
}

struct InferResult {
  ModelDef def;
  NestedRun run;
  std::size_t data_points = 0;
};

InferResult infer_one(const std::string& shorthand, const RunConfig& cfg,
                      const TwinGirderModel& fe, const std::vector<TruckLoad>& trucks,
                      const Dataset& data, std::uint64_t seed) {
  InferResult out;
  out.def = ModelDef::parse(shorthand);
  std::vector<std::size_t> subset;
  if (out.def.reference) {
    subset = reference_subset(data);
    out.data_points = subset.size();
  } else {
    out.data_points = data.size();
  }
  const PriorBox box = out.def.prior_box(cfg.priors);
  NestedConfig nc = cfg.sampler;
  nc.seed = seed;
  out.run = nested_sample(make_loglik(out.def, fe, trucks, data, std::move(subset)), box, nc);
  return out;
}

RunArchive make_archive(const InferResult& res, const Dataset& data,
                        const RunConfig& cfg) {
  RunArchive a;
  a.model = res.def.shorthand;
  for (ParamId p : res.def.all_params()) a.param_names.push_back(param_name(p));
  a.run = res.run;
  a.grid_x = data.grid.x_coords();
  a.grid_t = data.grid.t_coords();
  a.lanes = data.lanes;
  a.config_echo = config_to_json(cfg);
  return a;
}

std::string summary_csv(const InferResult& res) {
  const Eigen::VectorXd mean = posterior_mean(res.run);
  const Eigen::VectorXd map = map_estimate(res.run);
  const auto params = res.def.all_params();
  std::string csv = "parameter,mean,map,hd90_lo,hd90_hi\n";
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double> values, weights;
    values.reserve(res.run.samples.size());
    weights.reserve(res.run.samples.size());
    for (const auto& s : res.run.samples) {
      if (s.logweight == -std::numeric_limits<double>::infinity()) continue;
      values.push_back(s.theta(static_cast<Eigen::Index>(i)));
      weights.push_back(std::exp(s.logweight));
    }
    const auto [lo, hi] = hd_interval(values, weights, 0.9);
    csv += param_name(params[i]) + "," + fmt_double(mean(static_cast<Eigen::Index>(i))) +
           "," + fmt_double(map(static_cast<Eigen::Index>(i))) + "," + fmt_double(lo) + "," +
           fmt_double(hi) + "\n";
  }
  return csv;
}

double time_calls_ms(const std::function<void()>& fn, int repeats) {
  fn();  // warm up
  double total = 0.0;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    total += std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return total / repeats;
}

}  // namespace

void cmd_loglik_bench(const RunConfig& config, const CliOptions& opts) {
  const RunConfig cfg = with_seed_override(config, opts);
  if (cfg.bench.sizes.empty()) throw std::runtime_error("bench.sizes must not be empty");
  if (cfg.bench.sensors < 1 || cfg.bench.repeats < 1) {
    throw std::runtime_error("bench.sensors and bench.repeats must be positive");
  }
  std::string csv = "N,path,mean_ms\n";
  for (int n_total : cfg.bench.sizes) {
    const int nx = cfg.bench.sensors;
    const int nt = (n_total + nx - 1) / nx;
    const int n = nx * nt;
    std::vector<double> xs(static_cast<std::size_t>(nx)), ts(static_cast<std::size_t>(nt));
    for (int j = 0; j < nx; ++j) xs[static_cast<std::size_t>(j)] = 5.0 * j;
    for (int k = 0; k < nt; ++k) ts[static_cast<std::size_t>(k)] = 1.0 * k;
    const SpaceTimeGrid grid(xs, ts);

    Rng rng(mix_seed(cfg.sampler.seed, static_cast<std::uint64_t>(n)));
    Eigen::VectorXd y_model(n), y_obs(n);
    for (int i = 0; i < n; ++i) {
      y_model(i) = 10.0 + 5.0 * std::sin(0.05 * i);
      y_obs(i) = y_model(i) + 0.5 * rng.normal();
    }

    ProbModelSpec mult;
    mult.error_structure = ErrorStructure::Multiplicative;
    mult.kt = KernelKind::EXP;
    mult.kx = KernelKind::EXP;
    mult.c_v = 0.1;
    mult.sigma_meas = 0.2;
    mult.l_corr_t = 20.0;
    mult.l_corr_x = 30.0;
    ProbModelSpec add = mult;
    add.error_structure = ErrorStructure::Additive;
    add.sigma_model = 1.0;
    add.c_v = 0.0;

    // Dispatch must route these specs onto the structured paths.
    if (loglik(y_obs, y_model, mult, grid).path != LikPath::MultiplicativeFast ||
        loglik(y_obs, y_model, add, grid).path != LikPath::AdditiveEigen) {
      throw std::runtime_error("dispatch did not select the structured paths");
    }
    const bool dense_ok = static_cast<std::size_t>(n) <= kDenseCapDefault;
    if (dense_ok) {
      // The timing comparison is only meaningful if the paths agree.
      const double dm = loglik_dense(y_obs, y_model, build_covariance_dense(mult, grid, y_model));
      const double fm = loglik_multiplicative_fast(y_obs, y_model, mult, grid);
      const double da = loglik_dense(y_obs, y_model, build_covariance_dense(add, grid, y_model));
      const double fa = loglik_additive_fast(y_obs, y_model, add, grid);
      if (std::abs(dm - fm) > 1e-6 || std::abs(da - fa) > 1e-6) {
        throw std::runtime_error("fast/dense disagreement at N = " + std::to_string(n));
      }
      csv += std::to_string(n) + ",dense," +
             fmt_double(time_calls_ms(
                 [&] {
                   loglik_dense(y_obs, y_model, build_covariance_dense(mult, grid, y_model));
                 },
                 cfg.bench.repeats)) +
             "\n";
    }
    csv += std::to_string(n) + ",multiplicative_fast," +
           fmt_double(time_calls_ms(
               [&] { loglik_multiplicative_fast(y_obs, y_model, mult, grid); },
               cfg.bench.repeats)) +
           "\n";
    csv += std::to_string(n) + ",additive_eigen," +
           fmt_double(time_calls_ms([&] { loglik_additive_fast(y_obs, y_model, add, grid); },
                                    cfg.bench.repeats)) +
           "\n";
  }
  atomic_write_text(out_path(cfg, opts, "bench.csv"), csv);
  std::cout << "wrote " << out_path(cfg, opts, "bench.csv") << "\n";
}

void cmd_study(const RunConfig& config, const CliOptions& opts) {
  RunConfig cfg = with_seed_override(config, opts);
  StudyConfig sc;
  sc.grid_sizes = cfg.study.grid_sizes;
  sc.ground_truth_model = cfg.study.ground_truth_model;
  sc.ground_truth = cfg.study.ground_truth;
  sc.pool = cfg.study.pool;
  sc.replicates = cfg.study.replicates;
  sc.seed = cfg.sampler.seed;
  sc.sampler = cfg.sampler;
  sc.geometry = cfg.geometry;
  sc.lanes = cfg.grid.lanes;
  sc.priors = cfg.priors;
  const StudyReport report = run_study(sc, opts.workers);

  std::string csv =
      "grid,n_points,model,is_ground_truth,replicates_ok,mean_logz,log_mean_evidence,"
      "posterior_prob\n";
  for (const auto& c : report.cells) {
    csv += std::to_string(c.grid) + "," + std::to_string(c.n_points) + "," + c.model + "," +
           (c.is_ground_truth ? "1" : "0") + "," + std::to_string(c.replicates_ok) + "," +
           fmt_double(c.mean_logz) + "," + fmt_double(c.log_mean_evidence) + "," +
           fmt_double(c.posterior_prob) + "\n";
  }
  atomic_write_text(out_path(cfg, opts, "study.csv"), csv);

  json grids = json::array();
  for (const auto& g : report.grids) {
    json stats = json::array();
    for (const auto& s : g.map_stats) {
      stats.push_back(json{{"parameter", s.parameter},
                           {"truth", s.truth},
                           {"mean_map", s.mean_map},
                           {"rel_error", s.rel_error},
                           {"cov", s.cov}});
    }
    grids.push_back(json{{"grid", g.grid},
                         {"n_points", g.n_points},
                         {"p_gt", g.p_gt},
                         {"accuracy", g.accuracy},
                         {"failures", g.failures},
                         {"map_stats", std::move(stats)}});
  }
  const json summary{{"kind", "study_summary"},
                     {"schema_version", 1},
                     {"grids", std::move(grids)},
                     {"workers", opts.workers},
                     {"config", json::parse(config_to_json(cfg))}};
  atomic_write_text(out_path(cfg, opts, "study_summary.json"), summary.dump(2) + "\n");
  std::cout << "wrote " << out_path(cfg, opts, "study.csv") << " and study_summary.json\n";
}

void cmd_infer(const RunConfig& config, const CliOptions& opts) {
  const RunConfig cfg = with_seed_override(config, opts);
  const TwinGirderModel fe(cfg.geometry);
  const Dataset data = build_dataset(cfg, fe);
  const auto trucks = [&] {
    std::vector<TruckLoad> out;
    for (Lane l : data.lanes) out.push_back(cfg.truck.build(l, cfg.geometry));
    return out;
  }();
  const InferResult res = infer_one(cfg.model, cfg, fe, trucks, data, cfg.sampler.seed);
  atomic_write_text(out_path(cfg, opts, "run.json"), make_archive(res, data, cfg).to_json());
  atomic_write_text(out_path(cfg, opts, "posterior_summary.csv"), summary_csv(res));
  // Echo the scored dataset so synthetic runs can be reproduced from file.
  atomic_write_text(out_path(cfg, opts, "dataset.csv"), dataset_to_csv(data));
  std::cout << "model " << cfg.model << ": logZ = " << res.run.logz << " +- "
            << res.run.logz_err << " (nfe " << res.run.nfe << ", "
            << res.run.termination << ")\n";
  std::cout << "wrote " << out_path(cfg, opts, "run.json") << " and posterior_summary.csv\n";
}

void cmd_select(const RunConfig& config, const CliOptions& opts) {
  const RunConfig cfg = with_seed_override(config, opts);
  if (cfg.models.empty()) throw std::runtime_error("select needs a non-empty models list");
  const TwinGirderModel fe(cfg.geometry);
  const Dataset data = build_dataset(cfg, fe);
  const auto trucks = [&] {
    std::vector<TruckLoad> out;
    for (Lane l : data.lanes) out.push_back(cfg.truck.build(l, cfg.geometry));
    return out;
  }();

  std::vector<InferResult> results(cfg.models.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.models.size()) return;
      results[i] = infer_one(cfg.models[i], cfg, fe, trucks, data,
                             mix_seed(cfg.sampler.seed, 100 + i));
    }
  };
  const auto n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(opts.workers, 1)),
                            cfg.models.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Reference models run on a different (reduced) dataset, so their
  // evidences are not commensurate and stay out of the normalization.
  std::vector<double> logz_included;
  for (const auto& r : results) {
    if (!r.def.reference) logz_included.push_back(r.run.logz);
  }
  std::vector<double> probs;
  if (!logz_included.empty()) {
    probs = model_posteriors(logz_included,
                             std::vector<double>(logz_included.size(),
                                                 1.0 / static_cast<double>(logz_included.size())));
  }
  double best_logz = -std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    if (!r.def.reference) best_logz = std::max(best_logz, r.run.logz);
  }

  std::string csv =
      "model,n_data,logz,logz_err,nfe,excluded_from_normalization,posterior_prob,"
      "log10_bf_vs_best,jeffreys_vs_best\n";
  std::size_t prob_idx = 0;
  for (const auto& r : results) {
    csv += r.def.shorthand + "," + std::to_string(r.data_points) + "," +
           fmt_double(r.run.logz) + "," + fmt_double(r.run.logz_err) + "," +
           std::to_string(r.run.nfe) + ",";
    if (r.def.reference) {
      csv += "1,,,\n";
    } else {
      const BayesFactor bf = bayes_factor(r.run.logz, best_logz);
      csv += "0," + fmt_double(probs[prob_idx++]) + "," +
             fmt_double(bf.log_ratio / std::log(10.0)) + "," + bf.jeffreys + "\n";
    }
  }
  atomic_write_text(out_path(cfg, opts, "selection.csv"), csv);
  for (const auto& r : results) {
    atomic_write_text(out_path(cfg, opts, "run_" + r.def.shorthand + ".json"),
                      make_archive(r, data, cfg).to_json());
  }
  std::cout << "wrote " << out_path(cfg, opts, "selection.csv") << "\n";
}

void cmd_predict(const RunConfig& config, const CliOptions& opts) {
  const RunConfig cfg = with_seed_override(config, opts);
  if (cfg.predict.archive.empty()) throw std::runtime_error("predict.archive is required");
  if (cfg.predict.n_draws < 1) throw std::runtime_error("predict.n_draws must be positive");
  const RunArchive archive = RunArchive::from_json(read_text(cfg.predict.archive));
  const ModelDef def = ModelDef::parse(archive.model);
  const SpaceTimeGrid grid(archive.grid_x, archive.grid_t);
  const TwinGirderModel fe(cfg.geometry);
  std::vector<TruckLoad> trucks;
  for (Lane l : archive.lanes) trucks.push_back(cfg.truck.build(l, cfg.geometry));

  const Eigen::MatrixXd draws =
      posterior_predictive(archive.run, def, fe, trucks, grid,
                           static_cast<std::size_t>(cfg.predict.n_draws), cfg.predict.seed);

  std::string csv = "lane,sensor_x,t,mean,sd,q05,q95\n";
  const auto n = static_cast<Eigen::Index>(grid.size());
  for (std::size_t b = 0; b < archive.lanes.size(); ++b) {
    for (std::size_t k = 0; k < grid.n_t(); ++k) {
      for (std::size_t j = 0; j < grid.n_x(); ++j) {
        const auto col = static_cast<Eigen::Index>(b) * n +
                         static_cast<Eigen::Index>(grid.index(k, j));
        Eigen::VectorXd v = draws.col(col);
        const double mean = v.mean();
        const double sd = v.size() > 1
                              ? std::sqrt((v.array() - mean).square().sum() /
                                          static_cast<double>(v.size() - 1))
                              : 0.0;
        std::sort(v.data(), v.data() + v.size());
        auto quant = [&](double q) {
          const auto idx = static_cast<Eigen::Index>(
              q * static_cast<double>(v.size() - 1));
          return v(idx);
        };
        csv += to_string(archive.lanes[b]) + "," + fmt_double(grid.x_coords()[j]) + "," +
               fmt_double(grid.t_coords()[k]) + "," + fmt_double(mean) + "," +
               fmt_double(sd) + "," + fmt_double(quant(0.05)) + "," +
               fmt_double(quant(0.95)) + "\n";
      }
    }
  }
  atomic_write_text(out_path(cfg, opts, "predictive.csv"), csv);
  std::cout << "wrote " << out_path(cfg, opts, "predictive.csv") << " ("
            << cfg.predict.n_draws << " draws)\n";
}

void cmd_sweep(const RunConfig& config, const CliOptions& opts) {
  const RunConfig cfg = with_seed_override(config, opts);
  if (cfg.sweep.points < 1) throw std::runtime_error("sweep.points must be positive");
  static const std::vector<std::pair<std::string, ParamId>> sweepable{
      {"log10_Kr_1", ParamId::LogKr1}, {"log10_Kr_2", ParamId::LogKr2},
      {"log10_Kr_3", ParamId::LogKr3}, {"log10_Kr_4", ParamId::LogKr4},
      {"log10_Kv", ParamId::LogKv}};
  ParamId target = ParamId::LogKv;
  bool found = false;
  for (const auto& [name, id] : sweepable) {
    if (name == cfg.sweep.parameter) {
      target = id;
      found = true;
    }
  }
  if (!found) {
    throw std::runtime_error("sweep.parameter must be one of the structural parameters");
  }
  auto [lo, hi] = default_prior(target);
  if (const auto it = cfg.priors.find(cfg.sweep.parameter); it != cfg.priors.end()) {
    lo = it->second.first;
    hi = it->second.second;
  }

  const TwinGirderModel fe(cfg.geometry);
  const TruckLoad truck = cfg.truck.build(cfg.sweep.lane, cfg.geometry);
  std::vector<double> sensors = cfg.sweep.sensors_x;
  if (sensors.empty()) {
    double start = 0.0;
    for (double span : cfg.geometry.span_lengths_m) {
      sensors.push_back(start + 0.5 * span);
      start += span;
    }
  }
  const SpaceTimeGrid grid =
      make_sensor_grid(cfg.grid.sensors_per_span, cfg.grid.load_positions, cfg.geometry);
  const std::vector<double>& positions = grid.t_coords();

  std::string csv = "parameter,value,sensor_x,lane,peak_stress_mpa\n";
  for (int p = 0; p < cfg.sweep.points; ++p) {
    const double value =
        cfg.sweep.points == 1
            ? 0.5 * (lo + hi)
            : lo + (hi - lo) * static_cast<double>(p) / (cfg.sweep.points - 1);
    ParamValues vals;  // structural defaults at the prior mid-box
    vals.set(target, value);
    for (double sx : sensors) {
      const Eigen::VectorXd line = fe.influence_line(vals.theta_s, truck, sx, positions);
      Eigen::Index arg = 0;
      line.cwiseAbs().maxCoeff(&arg);
      csv += cfg.sweep.parameter + "," + fmt_double(value) + "," + fmt_double(sx) + "," +
             to_string(cfg.sweep.lane) + "," + fmt_double(line(arg)) + "\n";
    }
  }
  atomic_write_text(out_path(cfg, opts, "sweep.csv"), csv);
  std::cout << "wrote " << out_path(cfg, opts, "sweep.csv") << "\n";
}

}  // namespace bsi
