#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bsi {

/// Independent uniform prior box over the parameter vector.
struct PriorBox {
  std::vector<std::string> names;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dim() const { return lower.size(); }
  void validate() const;
  /// Componentwise affine map from the unit hypercube.
  Eigen::VectorXd transform(const Eigen::VectorXd& u) const;
  double log_volume() const;
};

struct NestedConfig {
  int n_live = 500;
  double dlogz = 0.01;          // termination bound on remaining evidence
  int walk_steps = 25;          // constrained random-walk length per replacement
  std::uint64_t seed = 0;
  std::int64_t max_iterations = 2'000'000;
};

struct NestedSample {
  Eigen::VectorXd theta;
  double loglik;
  double logweight;  // normalized: exp sums to one over the run
};

/// Output of one nested-sampling run: weighted posterior samples, the
/// log-evidence with its uncertainty, and diagnostics.
struct NestedRun {
  std::vector<NestedSample> samples;
  double logz = 0.0;
  double logz_err = 0.0;
  double information = 0.0;  // H, nats
  std::int64_t nfe = 0;      // likelihood evaluations
  int n_live = 0;
  int workers = 1;
  std::uint64_t seed = 0;
  std::string termination;
  bool low_acceptance_warning = false;
};

using LoglikFn = std::function<double(const Eigen::VectorXd&)>;

/// Static nested sampling with likelihood-constrained random-walk
/// replacement and deterministic prior-volume shrinkage log X_k = -k/n.
/// Evidence accumulates by trapezoid over the (X, L) staircase; the
/// remaining live points are folded in at termination. Deterministic for
/// a fixed seed.
NestedRun nested_sample(const LoglikFn& loglik, const PriorBox& box,
                        const NestedConfig& config);

/// Posterior model probabilities: softmax of logZ_i + log prior_i,
/// computed with max subtraction.
std::vector<double> model_posteriors(const std::vector<double>& logz,
                                     const std::vector<double>& prior_probs);

struct BayesFactor {
  double log_ratio;      // log R = logZ1 - logZ2 (prior terms cancel)
  double ratio;          // exp, may overflow to inf for huge gaps
  std::string jeffreys;  // strength-of-evidence label
};

BayesFactor bayes_factor(double logz_1, double logz_2, double prior_1 = 0.5,
                         double prior_2 = 0.5);

std::string jeffreys_label(double log10_ratio);

/// Sample-based MAP: the stored sample with the highest likelihood (the
/// priors are flat), first occurrence winning ties.
Eigen::VectorXd map_estimate(const NestedRun& run);

/// Posterior mean under the normalized weights.
Eigen::VectorXd posterior_mean(const NestedRun& run);

/// Shortest interval holding at least `mass` of the weighted samples.
std::pair<double, double> hd_interval(std::vector<double> values,
                                      std::vector<double> weights, double mass = 0.9);

/// Draws sample indices from the categorical distribution given by the
/// normalized run weights.
std::vector<std::size_t> resample_posterior(const NestedRun& run, std::size_t n_draws,
                                            std::uint64_t seed);

}  // namespace bsi
