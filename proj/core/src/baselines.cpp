#include "gpsurv/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gpsurv/error.hpp"

namespace gpsurv {

void WphmParams::validate(Eigen::Index dim) const {
  if (beta.size() != dim) throw ValidationError("WPHM needs one regression weight per covariate");
  if (!beta.allFinite()) throw ValidationError("WPHM weights must be finite");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("WPHM scale rho must be positive");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("WPHM shape nu must be positive");
}

Eigen::VectorXd pack_wphm(const WphmParams& p) {
  Eigen::VectorXd z(p.beta.size() + 2);
  z << p.beta, std::log(p.rho), std::log(p.nu);
  return z;
}

WphmParams unpack_wphm(const Eigen::VectorXd& z) {
  const Eigen::Index d = z.size() - 2;
  WphmParams p;
  p.beta = z.head(d);
  p.rho = std::exp(z[d]);
  p.nu = std::exp(z[d + 1]);
  return p;
}

SecondOrder wphm_objective(const SurvivalDataset& data, const Eigen::VectorXd& z, int risk) {
  const Eigen::Index d = data.dim();
  if (z.size() != d + 2) throw ValidationError("WPHM parameter vector has the wrong length");
  const double a = z[d];
  const double b = z[d + 1];
  const double nu = std::exp(b);
  const auto beta = z.head(d);
  const double n = static_cast<double>(data.size());
  const Eigen::Index ia = d;
  const Eigen::Index ib = d + 1;

  SecondOrder out;
  out.grad = Eigen::VectorXd::Zero(d + 2);
  out.hess = Eigen::MatrixXd::Zero(d + 2, d + 2);
  double value = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Record& r = data.records[static_cast<std::size_t>(i)];
    if (r.kind == RecordKind::kInterval) throw UnsupportedError("WPHM does not support interval records");
    const bool event = r.kind == RecordKind::kExact && r.risk == risk;
    const auto x = data.x.row(i).transpose();
    const double eta = beta.dot(x);
    const double u = std::log(r.time) - a;
    const double m = std::exp(nu * u + eta);

    value += m;
    out.grad.head(d) += m * x;
    out.grad[ia] -= nu * m;
    out.grad[ib] += m * nu * u;
    out.hess.topLeftCorner(d, d) += m * x * x.transpose();
    out.hess.block(0, ia, d, 1) -= nu * m * x;
    out.hess.block(0, ib, d, 1) += nu * m * u * x;
    out.hess(ia, ia) += nu * nu * m;
    out.hess(ia, ib) -= nu * m + nu * nu * m * u;
    out.hess(ib, ib) += m * (nu * nu * u * u + nu * u);
    if (event) {
      value -= b - a + (nu - 1.0) * u + eta;
      out.grad.head(d) -= x;
      out.grad[ia] += nu;
      out.grad[ib] -= 1.0 + nu * u;
      out.hess(ia, ib) += nu;
      out.hess(ib, ib) -= nu * u;
    }
  }
  out.hess.block(ia, 0, 2, d) = out.hess.block(0, ia, d, 2).transpose();
  out.hess(ib, ia) = out.hess(ia, ib);
  out.value = value / n;
  out.grad /= n;
  out.hess /= n;
  return out;
}

double wphm_nll(const SurvivalDataset& data, const WphmParams& params, int risk) {
  params.validate(data.dim());
  return wphm_objective(data, pack_wphm(params), risk).value;
}

WphmFit fit_wphm(const SurvivalDataset& data, int risk) {
  data.validate();
  if (data.has(RecordKind::kInterval)) throw UnsupportedError("WPHM does not support interval records");
  std::vector<double> event_times;
  for (const Record& r : data.records) {
    if (r.kind == RecordKind::kExact && r.risk == risk) event_times.push_back(r.time);
  }
  if (event_times.empty()) {
    throw ValidationError("WPHM parameters are unidentifiable: no events of risk " +
                          std::to_string(risk));
  }
  const auto mid = event_times.begin() + static_cast<std::ptrdiff_t>(event_times.size() / 2);
  std::nth_element(event_times.begin(), mid, event_times.end());

  WphmParams start;
  start.beta = Eigen::VectorXd::Zero(data.dim());
  start.rho = *mid;
  start.nu = 1.0;

  NewtonOptions opts;
  opts.grad_tol = 1e-8;
  const MinimizeResult res = damped_newton(
      [&](const Eigen::VectorXd& z) { return wphm_objective(data, z, risk); }, pack_wphm(start),
      opts);

  WphmFit fit;
  fit.params = unpack_wphm(res.x);
  fit.nll = res.value;
  fit.converged = res.converged;
  fit.iterations = res.iterations;
  fit.grad_norm = wphm_objective(data, res.x, risk).grad.lpNorm<Eigen::Infinity>();
  fit.risk = risk;
  return fit;
}

PredictiveDensity wphm_density(const Eigen::VectorXd& x, const WphmParams& params) {
  params.validate(x.size());
  // (tau / rho)^nu e^{beta.x} = tau^nu e^{beta.x - nu log rho}
  PredictiveDensity pd;
  pd.kind = DensityKind::kHazardWeibull;
  pd.nu = params.nu;
  pd.mu_hat = params.beta.dot(x) - params.nu * std::log(params.rho);
  pd.beta = 0.0;
  return pd;
}

Moments wphm_predict_mean(const Eigen::VectorXd& x, const WphmParams& params) {
  Moments m = predictive_moments(wphm_density(x, params));
  m.understates_variance = false;
  return m;
}

double wphm_mean_closed_form(const Eigen::VectorXd& x, const WphmParams& params) {
  params.validate(x.size());
  return params.rho * std::exp(-params.beta.dot(x) / params.nu) * std::tgamma(1.0 + 1.0 / params.nu);
}

}  // namespace gpsurv
