#include "bsi/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bsi/rng.hpp"

namespace bsi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

void PriorBox::validate() const {
  if (lower.size() != upper.size() ||
      names.size() != static_cast<std::size_t>(lower.size())) {
    throw std::invalid_argument("prior box fields must have equal length");
  }
  if (lower.size() == 0) throw std::invalid_argument("prior box must not be empty");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower(i) < upper(i))) {
      throw std::invalid_argument("prior bounds must satisfy lower < upper for '" +
                                  names[static_cast<std::size_t>(i)] + "'");
    }
  }
}

Eigen::VectorXd PriorBox::transform(const Eigen::VectorXd& u) const {
  if (u.size() != lower.size()) throw std::invalid_argument("unit cube dimension mismatch");
  return lower.array() + u.array() * (upper - lower).array();
}

double PriorBox::log_volume() const {
  return (upper - lower).array().log().sum();
}

NestedRun nested_sample(const LoglikFn& loglik, const PriorBox& box,
                        const NestedConfig& config) {
  box.validate();
  const auto d = box.dim();
  if (config.n_live < 2 * d) {
    throw std::invalid_argument("n_live must be at least twice the parameter dimension");
  }
  const int n_live = config.n_live;
  Rng rng(config.seed);

  NestedRun run;
  run.n_live = n_live;
  run.seed = config.seed;

  // Live set, kept in unit-cube coordinates.
  std::vector<Eigen::VectorXd> live_u(static_cast<std::size_t>(n_live));
  std::vector<double> live_logl(static_cast<std::size_t>(n_live));
  std::int64_t nfe = 0;
  int finite = 0;
  for (int i = 0; i < n_live; ++i) {
    Eigen::VectorXd u(d);
    for (Eigen::Index k = 0; k < d; ++k) u(k) = rng.uniform();
    live_u[static_cast<std::size_t>(i)] = u;
    const double ll = loglik(box.transform(u));
    ++nfe;
    live_logl[static_cast<std::size_t>(i)] = ll;
    if (std::isfinite(ll)) ++finite;
  }
  if (finite == 0) {
    throw std::runtime_error(
        "nested sampling found no region of nonzero likelihood in the prior box");
  }

  struct Dead {
    Eigen::VectorXd u;
    double logl;
  };
  std::vector<Dead> dead;
  dead.reserve(4096);

  const double log_shrink = -1.0 / static_cast<double>(n_live);
  double step_scale = 0.8;  // in units of the live-set spread per dimension
  double logz_dead = kNegInf;  // running sum of L_k * (X_{k-1} - X_k), rectangle bound
  std::int64_t stagnant_walks = 0;
  std::string termination = "max_iterations";

  // Per-dimension proposal widths from the live-set scatter, so walks mix
  // across flat directions while staying inside tight ones. Refreshed
  // periodically; the overall scale still adapts to the acceptance rate.
  Eigen::VectorXd dim_width = Eigen::VectorXd::Ones(d);
  const auto refresh_widths = [&]() {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& u : live_u) mean += u;
    mean /= static_cast<double>(n_live);
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (const auto& u : live_u) var += (u - mean).cwiseAbs2();
    var /= static_cast<double>(n_live);
    dim_width = var.cwiseSqrt().cwiseMax(1e-10);
  };
  refresh_widths();

  std::int64_t it = 0;
  while (it < config.max_iterations) {
    if (it % 25 == 0) refresh_widths();
    const auto worst = static_cast<std::size_t>(
        std::min_element(live_logl.begin(), live_logl.end()) - live_logl.begin());
    const double l_min = live_logl[worst];
    const double logx_prev = log_shrink * static_cast<double>(it);
    const double logx = log_shrink * static_cast<double>(it + 1);

    // Termination: even assigning the whole remaining volume to the best
    // live likelihood changes logZ by less than dlogz.
    const double l_best = *std::max_element(live_logl.begin(), live_logl.end());
    if (l_min > kNegInf) {
      const double logz_rem = l_best + logx_prev;
      const double logz_all = logsumexp(logz_dead, logz_rem);
      if (logz_all - logz_dead < config.dlogz && it > n_live) {
        termination = "dlogz";
        break;
      }
    }

    // Record the worst point with the volume shell it owned.
    if (l_min > kNegInf) {
      const double width = std::exp(logx_prev) - std::exp(logx);
      logz_dead = logsumexp(logz_dead, l_min + std::log(width));
    }
    dead.push_back({live_u[worst], l_min});

    // Replace it with a constrained random walk from a random survivor.
    std::size_t start = worst;
    if (n_live > 1) {
      do {
        start = static_cast<std::size_t>(rng.integer(static_cast<std::uint64_t>(n_live)));
      } while (start == worst);
    }
    Eigen::VectorXd u = live_u[start];
    double ll = live_logl[start];
    int accepted = 0;
    for (int s = 0; s < config.walk_steps; ++s) {
      Eigen::VectorXd prop = u;
      for (Eigen::Index k = 0; k < d; ++k) {
        prop(k) += step_scale * dim_width(k) * rng.normal();
      }
      bool inside = true;
      for (Eigen::Index k = 0; k < d; ++k) {
        if (prop(k) < 0.0 || prop(k) > 1.0) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      const double pl = loglik(box.transform(prop));
      ++nfe;
      if (pl >= l_min) {
        u = prop;
        ll = pl;
        ++accepted;
      }
    }
    // Steer acceptance toward one half.
    const double frac = static_cast<double>(accepted) / config.walk_steps;
    step_scale *= std::exp((frac - 0.5) / std::max<double>(2.0, static_cast<double>(d)));
    step_scale = std::clamp(step_scale, 1e-6, 10.0);
    if (frac < 0.05) {
      if (++stagnant_walks >= 20) run.low_acceptance_warning = true;
    } else {
      stagnant_walks = 0;
    }

    live_u[worst] = u;
    live_logl[worst] = ll;
    ++it;
  }

  // Fold in the surviving live points: the remaining volume X_it is split
  // linearly among them in likelihood order.
  std::vector<std::size_t> order(static_cast<std::size_t>(n_live));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return live_logl[a] < live_logl[b]; });

  const auto n_dead = static_cast<std::int64_t>(dead.size());
  const auto total = static_cast<std::size_t>(n_dead + n_live);
  std::vector<double> logx(total);
  const double x_end = std::exp(log_shrink * static_cast<double>(n_dead));
  for (std::int64_t k = 0; k < n_dead; ++k) {
    logx[static_cast<std::size_t>(k)] = log_shrink * static_cast<double>(k + 1);
  }
  for (int j = 0; j < n_live; ++j) {
    const double x = x_end * static_cast<double>(n_live - 1 - j) / n_live;
    logx[static_cast<std::size_t>(n_dead + j)] = x > 0.0 ? std::log(x) : kNegInf;
  }

  run.samples.resize(total);
  for (std::int64_t k = 0; k < n_dead; ++k) {
    auto& s = run.samples[static_cast<std::size_t>(k)];
    s.theta = box.transform(dead[static_cast<std::size_t>(k)].u);
    s.loglik = dead[static_cast<std::size_t>(k)].logl;
  }
  for (int j = 0; j < n_live; ++j) {
    auto& s = run.samples[static_cast<std::size_t>(n_dead + j)];
    s.theta = box.transform(live_u[order[static_cast<std::size_t>(j)]]);
    s.loglik = live_logl[order[static_cast<std::size_t>(j)]];
  }

  // Trapezoid accumulation: sample i owns the slab between the midpoints
  // of its neighboring volumes; the slabs tile (0, 1] exactly, so a flat
  // likelihood integrates to itself.
  double logz = kNegInf;
  std::vector<double> logw(total, kNegInf);
  for (std::size_t i = 0; i < total; ++i) {
    const double hi = i == 0 ? 1.0 : 0.5 * (std::exp(logx[i - 1]) + std::exp(logx[i]));
    const double lo =
        i + 1 == total ? 0.0 : 0.5 * (std::exp(logx[i]) + std::exp(logx[i + 1]));
    const double width = hi - lo;
    if (run.samples[i].loglik == kNegInf || width <= 0.0) continue;
    logw[i] = run.samples[i].loglik + std::log(width);
    logz = logsumexp(logz, logw[i]);
  }
  if (logz == kNegInf) {
    throw std::runtime_error("nested sampling accumulated zero evidence");
  }

  double information = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    if (logw[i] == kNegInf) {
      run.samples[i].logweight = kNegInf;
      continue;
    }
    const double w = logw[i] - logz;
    run.samples[i].logweight = w;
    information += std::exp(w) * (run.samples[i].loglik - logz);
  }

  run.logz = logz;
  run.information = information;
  run.logz_err = std::sqrt(std::max(information, 0.0) / n_live);
  run.nfe = nfe;
  run.termination = termination;
  return run;
}

std::vector<double> model_posteriors(const std::vector<double>& logz,
                                     const std::vector<double>& prior_probs) {
  if (logz.size() != prior_probs.size() || logz.empty()) {
    throw std::invalid_argument("model_posteriors: need equal-length non-empty inputs");
  }
  std::vector<double> score(logz.size());
  double best = kNegInf;
  for (std::size_t i = 0; i < logz.size(); ++i) {
    if (!(prior_probs[i] >= 0.0)) {
      throw std::invalid_argument("model prior probabilities must be non-negative");
    }
    score[i] = logz[i] + (prior_probs[i] > 0.0 ? std::log(prior_probs[i]) : kNegInf);
    best = std::max(best, score[i]);
  }
  double norm = 0.0;
  for (double& s : score) {
    s = std::exp(s - best);
    norm += s;
  }
  for (double& s : score) s /= norm;
  return score;
}

std::string jeffreys_label(double log10_ratio) {
  if (log10_ratio < 0.0) return "Negative";
  if (log10_ratio < 0.5) return "Barely worth mentioning";
  if (log10_ratio < 1.0) return "Substantial";
  if (log10_ratio < 1.5) return "Strong";
  if (log10_ratio < 2.0) return "Very strong";
  return "Decisive";
}

BayesFactor bayes_factor(double logz_1, double logz_2, double prior_1, double prior_2) {
  if (!(prior_1 > 0.0) || !(prior_2 > 0.0)) {
    throw std::invalid_argument("model priors must be positive");
  }
  // R = [p(M1|y)/p(M2|y)] * [p(M2)/p(M1)]; the prior terms cancel against
  // the posterior ones, leaving the evidence ratio.
  const double log_r = logz_1 - logz_2;
  return {log_r, std::exp(log_r), jeffreys_label(log_r / std::log(10.0))};
}

Eigen::VectorXd map_estimate(const NestedRun& run) {
  if (run.samples.empty()) throw std::invalid_argument("empty run");
  std::size_t best = 0;
  for (std::size_t i = 1; i < run.samples.size(); ++i) {
    if (run.samples[i].loglik > run.samples[best].loglik) best = i;
  }
  return run.samples[best].theta;
}

Eigen::VectorXd posterior_mean(const NestedRun& run) {
  if (run.samples.empty()) throw std::invalid_argument("empty run");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(run.samples.front().theta.size());
  for (const auto& s : run.samples) {
    if (s.logweight == kNegInf) continue;
    mean += std::exp(s.logweight) * s.theta;
  }
  return mean;
}

std::pair<double, double> hd_interval(std::vector<double> values,
                                      std::vector<double> weights, double mass) {
  if (values.size() != weights.size() || values.empty()) {
    throw std::invalid_argument("hd_interval: need matching non-empty inputs");
  }
  if (!(mass > 0.0) || !(mass < 1.0)) throw std::invalid_argument("mass must be in (0,1)");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> v(values.size()), cum(values.size() + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    v[i] = values[order[i]];
    total += weights[order[i]];
    cum[i + 1] = total;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights must have positive sum");
  const double target = mass * total;

  // Shortest window over the sorted samples holding the target mass.
  double best_lo = v.front(), best_hi = v.back();
  double best_len = best_hi - best_lo;
  std::size_t j = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    while (j < v.size() && cum[j + 1] - cum[i] < target) ++j;
    if (j == v.size()) break;
    const double len = v[j] - v[i];
    if (len < best_len) {
      best_len = len;
      best_lo = v[i];
      best_hi = v[j];
    }
  }
  return {best_lo, best_hi};
}

std::vector<std::size_t> resample_posterior(const NestedRun& run, std::size_t n_draws,
                                            std::uint64_t seed) {
  if (run.samples.empty()) throw std::invalid_argument("empty run");
  std::vector<double> cum;
  cum.reserve(run.samples.size());
  double total = 0.0;
  for (const auto& s : run.samples) {
    total += s.logweight == kNegInf ? 0.0 : std::exp(s.logweight);
    cum.push_back(total);
  }
  Rng rng(seed);
  std::vector<std::size_t> out(n_draws);
  for (std::size_t i = 0; i < n_draws; ++i) {
    const double r = rng.uniform() * total;
    out[i] = static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
    if (out[i] >= run.samples.size()) out[i] = run.samples.size() - 1;
  }
  return out;
}

}  // namespace bsi
