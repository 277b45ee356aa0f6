#include "gpsurv/hyperparams.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <utility>

#include "gpsurv/error.hpp"

namespace gpsurv {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 5> kKindNames{{
    {ModelKind::kGpAft, "gp-aft"},
    {ModelKind::kGpAftInterval, "gp-aft-interval"},
    {ModelKind::kGpCompeting, "gp-competing"},
    {ModelKind::kGpHazard, "gp-hazard"},
    {ModelKind::kGpHazardInterval, "gp-hazard-interval"},
}};

}  // namespace

std::string_view to_string(ModelKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ValidationError("unknown model kind '" + std::string(name) + "'");
}

bool is_competing(ModelKind kind) { return kind == ModelKind::kGpCompeting; }

bool is_hazard(ModelKind kind) {
  return kind == ModelKind::kGpHazard || kind == ModelKind::kGpHazardInterval;
}

bool accepts_intervals(ModelKind kind) {
  return kind == ModelKind::kGpAftInterval || kind == ModelKind::kGpHazardInterval;
}

void HyperParams::validate(Eigen::Index dim) const {
  if (is_competing(kind)) {
    multi.validate(dim);
  } else {
    single.validate(dim);
  }
  if (is_hazard(kind)) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("Weibull shape nu must be positive");
  } else {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("noise beta must be positive");
    if (!std::isfinite(eta)) throw ValidationError("prior mean eta must be finite");
    transform.validate();
  }
  if (omega_pinned && multi.omega != 0.0) throw ValidationError("pinned omega must be zero");
}

double HyperParams::prior_variance(Eigen::Index dim) const {
  return is_competing(kind) ? multi_prior_variance(multi, dim) : single.sigma;
}

std::string HyperParams::describe() const {
  std::ostringstream s;
  s.precision(6);
  if (is_competing(kind)) {
    s << "eta=" << eta << " mu=" << multi.mu << " beta=" << beta << " sigma=" << multi.sigma
      << " omega=" << multi.omega << " l=[" << multi.lengthscales.transpose() << "]";
  } else if (is_hazard(kind)) {
    s << "sigma=" << single.sigma << " l=[" << single.lengthscales.transpose() << "] nu=" << nu;
  } else {
    s << "eta=" << eta << " beta=" << beta << " sigma=" << single.sigma << " l=["
      << single.lengthscales.transpose() << "]";
  }
  if (!is_hazard(kind)) s << " gamma=" << transform.gamma;
  return s.str();
}

HyperParams force_independent(const HyperParams& theta) {
  if (!is_competing(theta.kind)) {
    throw UnsupportedError("force_independent applies to competing-risks models only");
  }
  HyperParams out = theta;
  out.multi.omega = 0.0;
  out.omega_pinned = true;
  if (out.multi.sigma == 0.0) throw ValidationError("cannot pin omega=0 while sigma=0");
  return out;
}

GramMatrix build_gram(const Eigen::MatrixXd& x, const HyperParams& theta) {
  if (is_competing(theta.kind)) return build_gram(x, theta.multi);
  return build_gram(x, theta.single);
}

Eigen::VectorXd cross_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_star, int risk,
                          const HyperParams& theta) {
  if (x_star.size() != x.cols()) throw ValidationError("covariate dimension mismatch");
  if (is_competing(theta.kind)) return multi_cross_cov(x, x_star, risk, theta.multi);
  return single_cross_cov(x, x_star, theta.single);
}

Observations observations_for(const SurvivalDataset& data, const HyperParams& theta) {
  if (is_hazard(theta.kind)) return raw_observations(data);
  return latent_observations(data, theta.transform);
}

void check_compatible(const SurvivalDataset& data, ModelKind kind) {
  const bool intervals = data.has(RecordKind::kInterval);
  const bool exact = data.has(RecordKind::kExact);
  if (accepts_intervals(kind)) {
    if (exact) {
      throw UnsupportedError(std::string(to_string(kind)) +
                             " takes interval and right-censored records only");
    }
    if (data.num_risks > 1) throw UnsupportedError("interval models support a single risk");
    return;
  }
  if (intervals) {
    throw UnsupportedError(std::string(to_string(kind)) + " cannot use interval-censored records");
  }
  if (is_competing(kind)) {
    if (data.num_risks > 2) throw UnsupportedError("competing-risks model supports two risks");
  } else if (data.num_risks > 1 || data.count_risk(2) > 0) {
    throw UnsupportedError(std::string(to_string(kind)) + " supports a single risk");
  }
}

}  // namespace gpsurv
