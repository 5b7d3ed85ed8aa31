#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bsi/beam.hpp"
#include "bsi/inference.hpp"
#include "bsi/likelihood.hpp"

namespace bsi {

/// Inference never drives the measurement noise all the way to zero:
/// the structured likelihood paths need an invertible noise covariance.
inline constexpr double kSigmaMeasFloor = 1e-6;

enum class ParamId {
  LogKr1,
  LogKr2,
  LogKr3,
  LogKr4,
  LogKv,
  Cv,
  SigmaModel,
  SigmaMeas,
  LcorrT,
  LcorrX,
};

std::string param_name(ParamId id);
std::pair<double, double> default_prior(ParamId id);

using PriorOverrides = std::map<std::string, std::pair<double, double>>;

/// A candidate coupled probabilistic-physical model, named by the
/// shorthand "<temporal kernel>-<M|A>". Correlated models use an
/// exponential spatial kernel; IID and REF models have none. REF models
/// are IID variants evaluated on a reduced, hand-picked dataset and are
/// excluded from posterior model probability normalization.
struct ModelDef {
  std::string shorthand;
  ErrorStructure error_structure = ErrorStructure::Additive;
  KernelKind kt = KernelKind::IID;
  KernelKind kx = KernelKind::IID;
  bool reference = false;
  std::vector<ParamId> theta_c;

  static ModelDef parse(std::string_view shorthand);

  /// Full parameter list: the five structural parameters then theta_c.
  std::vector<ParamId> all_params() const;
  Eigen::Index dim() const { return static_cast<Eigen::Index>(all_params().size()); }

  PriorBox prior_box(const PriorOverrides& overrides = {}) const;

  ThetaS theta_s(const Eigen::VectorXd& theta) const;
  ProbModelSpec prob_spec(const Eigen::VectorXd& theta) const;
};

/// A complete assignment of all ten parameters; used for ground truths
/// and as the fixed values of parameters a model does not infer.
struct ParamValues {
  ThetaS theta_s;
  double c_v = 0.1;
  double sigma_model = 1.0;
  double sigma_meas = 0.2;
  double l_corr_t = 20.0;
  double l_corr_x = 30.0;

  double get(ParamId id) const;
  void set(ParamId id, double value);

  /// Probabilistic model with this model's structure and these values.
  ProbModelSpec prob_spec(const ModelDef& model) const;
  /// Theta vector in the model's parameter order.
  Eigen::VectorXd pack(const ModelDef& model) const;
};

}  // namespace bsi
