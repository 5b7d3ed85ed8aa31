#include "bsi/study.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "bsi/likelihood.hpp"
#include "bsi/structured.hpp"

namespace bsi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& v) {
  double best = kNegInf;
  for (double x : v) best = std::max(best, x);
  if (best == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - best);
  return best + std::log(sum);
}

/// Symmetric PSD square root with eigenvalue clipping at zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::VectorXd draw_normals(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  return z;
}

}  // namespace

SpaceTimeGrid make_sensor_grid(int n_x_per_span, int n_t, const BeamGeometry& geometry) {
  if (n_x_per_span < 1 || n_t < 1) {
    throw std::invalid_argument("sensor and time counts must be at least 1");
  }
  geometry.validate();
  std::vector<double> x;
  double start = 0.0;
  for (double span : geometry.span_lengths_m) {
    for (int k = 1; k <= n_x_per_span; ++k) {
      x.push_back(start + span * static_cast<double>(k) /
                              static_cast<double>(n_x_per_span + 1));
    }
    start += span;
  }
  const double total = geometry.total_length_m();
  std::vector<double> t;
  for (int k = 1; k <= n_t; ++k) {
    t.push_back(total * static_cast<double>(k) / static_cast<double>(n_t + 1));
  }
  return SpaceTimeGrid(std::move(x), std::move(t));
}

Eigen::VectorXd sample_synthetic(const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                                 const Eigen::VectorXd& y_model, std::uint64_t seed,
                                 std::size_t dense_cap) {
  Rng rng(seed);
  return sample_synthetic(spec, grid, y_model, rng, dense_cap);
}

Eigen::VectorXd sample_synthetic(const ProbModelSpec& spec, const SpaceTimeGrid& grid,
                                 const Eigen::VectorXd& y_model, Rng& rng,
                                 std::size_t dense_cap) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (y_model.size() != n) {
    throw std::invalid_argument("sample_synthetic: y_model length must match grid");
  }
  const bool mult = spec.error_structure == ErrorStructure::Multiplicative;
  const double amp = mult ? spec.c_v : spec.sigma_model;
  if (amp == 0.0 && spec.sigma_meas == 0.0) return y_model;

  if (grid.size() <= dense_cap) {
    const Eigen::MatrixXd sigma = build_covariance_dense(spec, grid, y_model, dense_cap);
    const Eigen::VectorXd z = draw_normals(rng, n);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) {
      return y_model + Eigen::MatrixXd(llt.matrixL()) * z;
    }
    // Semi-definite case (e.g. sigma_meas = 0 with a degenerate kernel).
    return y_model + psd_sqrt(sigma) * z;
  }

  // Above the cap: sample through the Kronecker factors.
  const auto [ct, cx] =
      separable_correlation(spec.kt, spec.kx, grid, spec.l_corr_t, spec.l_corr_x);
  const Eigen::MatrixXd st = psd_sqrt(ct);
  const Eigen::MatrixXd sx = psd_sqrt(cx);
  const Eigen::VectorXd z1 = draw_normals(rng, n);
  const Eigen::VectorXd z2 = draw_normals(rng, n);
  Eigen::VectorXd corr = kron_matvec(st, sx, z1);
  Eigen::VectorXd e;
  if (mult) {
    e = spec.c_v * y_model.cwiseProduct(corr) + spec.sigma_meas * z2;
  } else {
    e = spec.sigma_model * corr + spec.sigma_meas * z2;
  }
  return y_model + e;
}

void StudyConfig::validate() const {
  if (grid_sizes.empty()) throw std::invalid_argument("study needs at least one grid size");
  for (int g : grid_sizes) {
    if (g < 1) throw std::invalid_argument("grid sizes must be >= 1");
  }
  if (replicates < 1) throw std::invalid_argument("study needs at least one replicate");
  if (pool.empty()) throw std::invalid_argument("study needs a non-empty model pool");
  bool found = false;
  for (const auto& m : pool) found = found || m == ground_truth_model;
  if (!found) throw std::invalid_argument("ground truth model must be in the pool");
  if (lanes.empty()) throw std::invalid_argument("study needs at least one lane");
  geometry.validate();
}

std::vector<TruckLoad> default_trucks(const std::vector<Lane>& lanes,
                                      const BeamGeometry& geometry) {
  std::vector<TruckLoad> out;
  out.reserve(lanes.size());
  for (Lane l : lanes) out.push_back(TruckLoad::default_truck(l, geometry));
  return out;
}

namespace {

struct CellTask {
  std::size_t grid_idx;
  int replicate;
  std::size_t model_idx;
};

struct CellResult {
  bool ok = false;
  std::string error;
  double logz = kNegInf;
  Eigen::VectorXd map;
};

}  // namespace

StudyReport run_study(const StudyConfig& config, int workers) {
  config.validate();
  if (workers < 1) workers = 1;

  const TwinGirderModel fe(config.geometry);
  const auto trucks = default_trucks(config.lanes, config.geometry);
  const auto n_lanes = trucks.size();

  std::vector<ModelDef> models;
  models.reserve(config.pool.size());
  std::size_t gt_idx = 0;
  for (std::size_t i = 0; i < config.pool.size(); ++i) {
    models.push_back(ModelDef::parse(config.pool[i]));
    if (config.pool[i] == config.ground_truth_model) gt_idx = i;
  }
  const ModelDef gt_def = ModelDef::parse(config.ground_truth_model);
  const ProbModelSpec gt_spec = config.ground_truth.prob_spec(gt_def);

  // Shared per-grid context: lattice and the noiseless truth response.
  std::vector<SpaceTimeGrid> grids;
  std::vector<Eigen::VectorXd> y_true;
  for (int gs : config.grid_sizes) {
    grids.push_back(make_sensor_grid(gs, gs, config.geometry));
    y_true.push_back(fe.response_grid(config.ground_truth.theta_s, trucks, grids.back()));
  }

  std::vector<CellTask> tasks;
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    for (int rep = 0; rep < config.replicates; ++rep) {
      for (std::size_t mi = 0; mi < models.size(); ++mi) {
        tasks.push_back({gi, rep, mi});
      }
    }
  }
  std::vector<CellResult> results(tasks.size());

  auto dataset_for = [&](std::size_t gi, int rep) {
    const auto& grid = grids[gi];
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd y_obs(static_cast<Eigen::Index>(n_lanes) * n);
    for (std::size_t lane = 0; lane < n_lanes; ++lane) {
      const std::uint64_t s =
          mix_seed(mix_seed(mix_seed(config.seed, 1000 + gi), static_cast<std::uint64_t>(rep)),
                   lane);
      y_obs.segment(static_cast<Eigen::Index>(lane) * n, n) = sample_synthetic(
          gt_spec, grid, y_true[gi].segment(static_cast<Eigen::Index>(lane) * n, n), s);
    }
    return y_obs;
  };

  auto run_task = [&](const CellTask& task) {
    CellResult out;
    try {
      const auto& grid = grids[task.grid_idx];
      const Eigen::VectorXd y_obs = dataset_for(task.grid_idx, task.replicate);
      const ModelDef& def = models[task.model_idx];
      const PriorBox box = def.prior_box(config.priors);
      const LoglikFn fn = [&](const Eigen::VectorXd& theta) {
        const Eigen::VectorXd y_model = fe.response_grid(def.theta_s(theta), trucks, grid);
        return loglik_blocks(y_obs, y_model, def.prob_spec(theta), grid, n_lanes).value;
      };
      NestedConfig nc = config.sampler;
      nc.seed = mix_seed(
          mix_seed(mix_seed(config.seed, 7000 + task.grid_idx),
                   static_cast<std::uint64_t>(task.replicate)),
          9000 + task.model_idx);
      const NestedRun run = nested_sample(fn, box, nc);
      out.ok = true;
      out.logz = run.logz;
      out.map = map_estimate(run);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  };

  if (workers == 1 || tasks.size() <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = run_task(tasks[i]);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        results[i] = run_task(tasks[i]);
      }
    };
    std::vector<std::thread> pool;
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), tasks.size());
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  auto result_at = [&](std::size_t gi, int rep, std::size_t mi) -> const CellResult& {
    const std::size_t idx =
        (gi * static_cast<std::size_t>(config.replicates) + static_cast<std::size_t>(rep)) *
            models.size() +
        mi;
    return results[idx];
  };

  StudyReport report;
  const auto gt_params = gt_def.all_params();
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    const std::size_t n_points = grids[gi].size() * n_lanes;
    std::vector<double> log_mean_ev(models.size(), kNegInf);
    StudyGridSummary summary;
    summary.grid = config.grid_sizes[gi];
    summary.n_points = n_points;

    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      StudyCell cell;
      cell.grid = config.grid_sizes[gi];
      cell.n_points = n_points;
      cell.model = models[mi].shorthand;
      cell.is_ground_truth = mi == gt_idx;
      std::vector<double> logzs;
      for (int rep = 0; rep < config.replicates; ++rep) {
        const auto& r = result_at(gi, rep, mi);
        if (r.ok) {
          logzs.push_back(r.logz);
        } else {
          ++summary.failures;
        }
      }
      cell.replicates_ok = static_cast<int>(logzs.size());
      if (!logzs.empty()) {
        double mean = 0.0;
        for (double z : logzs) mean += z;
        cell.mean_logz = mean / static_cast<double>(logzs.size());
        cell.log_mean_evidence =
            logsumexp(logzs) - std::log(static_cast<double>(logzs.size()));
      } else {
        cell.mean_logz = kNegInf;
        cell.log_mean_evidence = kNegInf;
      }
      log_mean_ev[mi] = cell.log_mean_evidence;
      report.cells.push_back(cell);
    }

    // Posterior model probabilities from the mean evidences, equal priors.
    {
      std::vector<double> finite;
      for (double z : log_mean_ev) {
        if (z > kNegInf) finite.push_back(z);
      }
      if (!finite.empty()) {
        const double norm = logsumexp(finite);
        for (std::size_t mi = 0; mi < models.size(); ++mi) {
          auto& cell = report.cells[report.cells.size() - models.size() + mi];
          cell.posterior_prob =
              cell.log_mean_evidence > kNegInf ? std::exp(cell.log_mean_evidence - norm) : 0.0;
          if (mi == gt_idx) summary.p_gt = cell.posterior_prob;
        }
      }
    }

    // Identification accuracy over replicates with a complete model sweep.
    int complete = 0;
    int hits = 0;
    for (int rep = 0; rep < config.replicates; ++rep) {
      bool all_ok = true;
      for (std::size_t mi = 0; mi < models.size(); ++mi) {
        all_ok = all_ok && result_at(gi, rep, mi).ok;
      }
      if (!all_ok) continue;
      ++complete;
      bool gt_wins = true;
      const double gt_z = result_at(gi, rep, gt_idx).logz;
      for (std::size_t mi = 0; mi < models.size(); ++mi) {
        if (mi != gt_idx && result_at(gi, rep, mi).logz >= gt_z) gt_wins = false;
      }
      if (gt_wins) ++hits;
    }
    summary.accuracy =
        complete > 0 ? static_cast<double>(hits) / static_cast<double>(complete) : 0.0;

    // MAP scatter for the ground-truth model.
    std::vector<Eigen::VectorXd> maps;
    for (int rep = 0; rep < config.replicates; ++rep) {
      const auto& r = result_at(gi, rep, gt_idx);
      if (r.ok) maps.push_back(r.map);
    }
    for (std::size_t p = 0; p < gt_params.size(); ++p) {
      MapStat stat;
      stat.parameter = param_name(gt_params[p]);
      stat.truth = config.ground_truth.get(gt_params[p]);
      if (!maps.empty()) {
        double mean = 0.0;
        for (const auto& m : maps) mean += m(static_cast<Eigen::Index>(p));
        mean /= static_cast<double>(maps.size());
        double var = 0.0;
        for (const auto& m : maps) {
          const double dx = m(static_cast<Eigen::Index>(p)) - mean;
          var += dx * dx;
        }
        var = maps.size() > 1 ? var / static_cast<double>(maps.size() - 1) : 0.0;
        stat.mean_map = mean;
        stat.rel_error = stat.truth != 0.0 ? std::abs(mean - stat.truth) / std::abs(stat.truth)
                                           : std::abs(mean);
        stat.cov = mean != 0.0 ? std::sqrt(var) / std::abs(mean) : 0.0;
      }
      summary.map_stats.push_back(stat);
    }

    report.grids.push_back(std::move(summary));
  }
  return report;
}

Eigen::MatrixXd posterior_predictive(const NestedRun& run, const ModelDef& model,
                                     const TwinGirderModel& fe,
                                     const std::vector<TruckLoad>& trucks,
                                     const SpaceTimeGrid& grid, std::size_t n_draws,
                                     std::uint64_t seed, std::size_t dense_cap) {
  if (n_draws < 1) throw std::invalid_argument("need at least one predictive draw");
  if (trucks.empty()) throw std::invalid_argument("need at least one truck");
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto total = static_cast<Eigen::Index>(trucks.size()) * n;
  const auto picks = resample_posterior(run, n_draws, mix_seed(seed, 1));
  Rng noise_rng(mix_seed(seed, 2));

  std::unordered_map<std::size_t, Eigen::VectorXd> y_cache;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_draws), total);
  for (std::size_t i = 0; i < n_draws; ++i) {
    const auto& theta = run.samples[picks[i]].theta;
    auto it = y_cache.find(picks[i]);
    if (it == y_cache.end()) {
      it = y_cache.emplace(picks[i], fe.response_grid(model.theta_s(theta), trucks, grid))
               .first;
    }
    const ProbModelSpec spec = model.prob_spec(theta);
    for (std::size_t lane = 0; lane < trucks.size(); ++lane) {
      const auto off = static_cast<Eigen::Index>(lane) * n;
      out.row(static_cast<Eigen::Index>(i)).segment(off, n) =
          sample_synthetic(spec, grid, it->second.segment(off, n), noise_rng, dense_cap);
    }
  }
  return out;
}

}  // namespace bsi
