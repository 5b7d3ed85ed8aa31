#include "bsi/models.hpp"

#include <stdexcept>

namespace bsi {

std::string param_name(ParamId id) {
  switch (id) {
    case ParamId::LogKr1: return "log10_Kr_1";
    case ParamId::LogKr2: return "log10_Kr_2";
    case ParamId::LogKr3: return "log10_Kr_3";
    case ParamId::LogKr4: return "log10_Kr_4";
    case ParamId::LogKv: return "log10_Kv";
    case ParamId::Cv: return "C_v";
    case ParamId::SigmaModel: return "sigma_model";
    case ParamId::SigmaMeas: return "sigma_meas";
    case ParamId::LcorrT: return "l_corr_t";
    case ParamId::LcorrX: return "l_corr_x";
  }
  throw std::logic_error("unreachable parameter id");
}

std::pair<double, double> default_prior(ParamId id) {
  switch (id) {
    case ParamId::LogKr1:
    case ParamId::LogKr2:
    case ParamId::LogKr3:
    case ParamId::LogKr4: return {4.0, 10.0};
    case ParamId::LogKv: return {0.0, 8.0};
    case ParamId::Cv: return {0.0, 1.0};
    case ParamId::SigmaModel: return {0.0, 5.0};
    // Lower bound clamped away from zero: the fast likelihood paths
    // invert the noise covariance.
    case ParamId::SigmaMeas: return {kSigmaMeasFloor, 1.0};
    case ParamId::LcorrT:
    case ParamId::LcorrX: return {0.0, 300.0};
  }
  throw std::logic_error("unreachable parameter id");
}

ModelDef ModelDef::parse(std::string_view shorthand) {
  const auto dash = shorthand.rfind('-');
  if (dash == std::string_view::npos || dash + 2 != shorthand.size()) {
    throw std::invalid_argument("malformed model shorthand '" + std::string(shorthand) +
                                "' (expected e.g. EXP-A, IID-M, REF-A)");
  }
  ModelDef def;
  def.shorthand = std::string(shorthand);
  const char suffix = shorthand[dash + 1];
  if (suffix == 'M') {
    def.error_structure = ErrorStructure::Multiplicative;
  } else if (suffix == 'A') {
    def.error_structure = ErrorStructure::Additive;
  } else {
    throw std::invalid_argument("model suffix must be M or A in '" +
                                std::string(shorthand) + "'");
  }
  const std::string_view head = shorthand.substr(0, dash);
  const bool mult = def.error_structure == ErrorStructure::Multiplicative;
  if (head == "IID" || head == "REF") {
    def.kt = KernelKind::IID;
    def.kx = KernelKind::IID;
    def.reference = head == "REF";
    if (mult) {
      def.theta_c = {ParamId::Cv, ParamId::SigmaMeas};
    } else {
      def.theta_c = {ParamId::SigmaModel};
    }
    return def;
  }
  def.kt = kernel_from_string(head);  // RBF or EXP
  def.kx = KernelKind::EXP;
  if (mult) {
    def.theta_c = {ParamId::Cv, ParamId::SigmaMeas, ParamId::LcorrT, ParamId::LcorrX};
  } else {
    def.theta_c = {ParamId::SigmaModel, ParamId::SigmaMeas, ParamId::LcorrT,
                   ParamId::LcorrX};
  }
  return def;
}

std::vector<ParamId> ModelDef::all_params() const {
  std::vector<ParamId> out{ParamId::LogKr1, ParamId::LogKr2, ParamId::LogKr3,
                           ParamId::LogKr4, ParamId::LogKv};
  out.insert(out.end(), theta_c.begin(), theta_c.end());
  return out;
}

PriorBox ModelDef::prior_box(const PriorOverrides& overrides) const {
  const auto params = all_params();
  PriorBox box;
  box.lower.resize(static_cast<Eigen::Index>(params.size()));
  box.upper.resize(static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = param_name(params[i]);
    auto [lo, hi] = default_prior(params[i]);
    if (const auto it = overrides.find(name); it != overrides.end()) {
      lo = it->second.first;
      hi = it->second.second;
      if (params[i] == ParamId::SigmaMeas && lo < kSigmaMeasFloor) lo = kSigmaMeasFloor;
    }
    box.names.push_back(name);
    box.lower(static_cast<Eigen::Index>(i)) = lo;
    box.upper(static_cast<Eigen::Index>(i)) = hi;
  }
  box.validate();
  return box;
}

namespace {

ParamValues unpack(const ModelDef& def, const Eigen::VectorXd& theta) {
  const auto params = def.all_params();
  if (theta.size() != static_cast<Eigen::Index>(params.size())) {
    throw std::invalid_argument("theta has length " + std::to_string(theta.size()) +
                                ", model " + def.shorthand + " expects " +
                                std::to_string(params.size()));
  }
  ParamValues v;
  // Parameters the model does not infer stay at fixed neutral values.
  v.c_v = 0.0;
  v.sigma_model = 0.0;
  v.sigma_meas = kSigmaMeasFloor;
  v.l_corr_t = 0.0;
  v.l_corr_x = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    v.set(params[i], theta(static_cast<Eigen::Index>(i)));
  }
  return v;
}

}  // namespace

ThetaS ModelDef::theta_s(const Eigen::VectorXd& theta) const {
  return unpack(*this, theta).theta_s;
}

ProbModelSpec ModelDef::prob_spec(const Eigen::VectorXd& theta) const {
  return unpack(*this, theta).prob_spec(*this);
}

double ParamValues::get(ParamId id) const {
  switch (id) {
    case ParamId::LogKr1: return theta_s.log10_kr[0];
    case ParamId::LogKr2: return theta_s.log10_kr[1];
    case ParamId::LogKr3: return theta_s.log10_kr[2];
    case ParamId::LogKr4: return theta_s.log10_kr[3];
    case ParamId::LogKv: return theta_s.log10_kv;
    case ParamId::Cv: return c_v;
    case ParamId::SigmaModel: return sigma_model;
    case ParamId::SigmaMeas: return sigma_meas;
    case ParamId::LcorrT: return l_corr_t;
    case ParamId::LcorrX: return l_corr_x;
  }
  throw std::logic_error("unreachable parameter id");
}

void ParamValues::set(ParamId id, double value) {
  switch (id) {
    case ParamId::LogKr1: theta_s.log10_kr[0] = value; return;
    case ParamId::LogKr2: theta_s.log10_kr[1] = value; return;
    case ParamId::LogKr3: theta_s.log10_kr[2] = value; return;
    case ParamId::LogKr4: theta_s.log10_kr[3] = value; return;
    case ParamId::LogKv: theta_s.log10_kv = value; return;
    case ParamId::Cv: c_v = value; return;
    case ParamId::SigmaModel: sigma_model = value; return;
    case ParamId::SigmaMeas: sigma_meas = value; return;
    case ParamId::LcorrT: l_corr_t = value; return;
    case ParamId::LcorrX: l_corr_x = value; return;
  }
  throw std::logic_error("unreachable parameter id");
}

ProbModelSpec ParamValues::prob_spec(const ModelDef& model) const {
  ProbModelSpec spec;
  spec.error_structure = model.error_structure;
  spec.kt = model.kt;
  spec.kx = model.kx;
  spec.c_v = c_v;
  spec.sigma_model = sigma_model;
  spec.sigma_meas = sigma_meas;
  spec.l_corr_t = l_corr_t;
  spec.l_corr_x = l_corr_x;
  spec.validate();
  return spec;
}

Eigen::VectorXd ParamValues::pack(const ModelDef& model) const {
  const auto params = model.all_params();
  Eigen::VectorXd theta(static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    theta(static_cast<Eigen::Index>(i)) = get(params[i]);
  }
  return theta;
}

}  // namespace bsi
