#include "gpsurv/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gpsurv/error.hpp"
#include "gpsurv/special.hpp"

namespace gpsurv {

namespace {

constexpr double kQuadTol = 1e-12;
constexpr double kSqrtPi = 1.7724538509055160273;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 61>;

void check_risk(const FittedModel& model, int risk) {
  if (is_competing(model.hyper.kind) && risk != 1 && risk != 2) {
    throw ValidationError("risk index must be 1 or 2");
  }
}

void check_grid(std::span<const double> grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw DomainError("curve grid must be nonnegative");
    if (i > 0 && grid[i] < grid[i - 1]) throw ValidationError("curve grid must be sorted ascending");
  }
}

// Integrate g over consecutive panels, summing error estimates.
template <typename F>
double panels(F&& g, const std::vector<double>& cuts, double& error) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double err = 0.0;
    total += Kronrod::integrate(g, cuts[k], cuts[k + 1], 15, kQuadTol, &err);
    error += err;
  }
  return total;
}

Moments finish(double mean, double second, double error, double scale) {
  Moments m;
  m.mean = mean;
  m.variance = std::max(second, 0.0);
  if (!(error <= 1e-8 * std::max(scale, 1e-300)) || !std::isfinite(mean) || !std::isfinite(second)) {
    m.wide = true;
    m.warning = "quadrature tolerance not reached; the predictive density is very wide";
  }
  return m;
}

}  // namespace

LatentPrediction predict_latent(const Eigen::VectorXd& x_star, const FittedModel& model, int risk,
                                const PredictOptions& opts) {
  if (!model.converged) throw NotConvergedError("prediction requires a converged MAP fit");
  check_risk(model, risk);
  const HyperParams& th = model.hyper;
  const Eigen::VectorXd ks = cross_cov(model.data.x, x_star, risk, th);
  LatentPrediction out;
  if (opts.omit_prior_mean) {
    out.mu_hat = ks.dot(model.gram.solve(model.f_hat));
  } else {
    out.mu_hat = th.prior_mean() + ks.dot(model.alpha);
  }
  double reduction = 0.0;
  if (model.w_nonnegative) {
    const Eigen::VectorXd v =
        model.b_factor.matrixL().solve(Eigen::VectorXd(model.w_diag.cwiseSqrt().cwiseProduct(ks)));
    reduction = v.squaredNorm();
  } else {
    reduction = ks.dot(model.iwk.solve(Eigen::VectorXd(model.w_diag.cwiseProduct(ks))));
  }
  out.kappa_hat = std::max(th.prior_variance(model.data.dim()) - reduction, 0.0);
  return out;
}

PredictiveDensity predictive_density(const Eigen::VectorXd& x_star, const FittedModel& model,
                                     int risk, const PredictOptions& opts) {
  const LatentPrediction lp = predict_latent(x_star, model, risk, opts);
  PredictiveDensity pd;
  pd.mu_hat = lp.mu_hat;
  pd.kappa_hat = lp.kappa_hat;
  pd.transform = model.hyper.transform;
  if (is_hazard(model.hyper.kind)) {
    pd.kind = DensityKind::kHazardWeibull;
    pd.nu = model.hyper.nu;
    pd.beta = 0.0;
  } else {
    pd.beta = model.hyper.beta;
  }
  return pd;
}

double predictive_pdf(double tau, const PredictiveDensity& pd) {
  if (tau < 0.0 || std::isnan(tau)) throw DomainError("event time must be nonnegative");
  if (tau == 0.0) return 0.0;
  if (pd.kind == DensityKind::kHazardWeibull) {
    const double lt = std::log(tau);
    const double lx = pd.nu * lt + pd.mu_hat;
    return std::exp(std::log(pd.nu) + lx - lt - std::exp(lx));
  }
  const double v = pd.latent_variance();
  const double r = to_latent(tau, pd.transform) - pd.mu_hat;
  return std::exp(-0.5 * (kLog2Pi + std::log(v)) - r * r / (2.0 * v) +
                  log_jacobian(tau, pd.transform));
}

double predictive_survival(double tau, const PredictiveDensity& pd) {
  if (tau < 0.0 || std::isnan(tau)) throw DomainError("event time must be nonnegative");
  if (tau == 0.0) return 1.0;
  if (pd.kind == DensityKind::kHazardWeibull) {
    return std::exp(-std::exp(pd.nu * std::log(tau) + pd.mu_hat));
  }
  return std::exp(log_survival_gauss(to_latent(tau, pd.transform), pd.mu_hat,
                                     std::sqrt(pd.latent_variance())));
}

double predictive_hazard(double tau, const PredictiveDensity& pd) {
  if (tau < 0.0 || std::isnan(tau)) throw DomainError("event time must be nonnegative");
  if (pd.kind == DensityKind::kHazardWeibull) {
    if (tau == 0.0) {
      if (pd.nu < 1.0) return std::numeric_limits<double>::infinity();
      return pd.nu == 1.0 ? std::exp(pd.mu_hat) : 0.0;
    }
    return std::exp(std::log(pd.nu) + (pd.nu - 1.0) * std::log(tau) + pd.mu_hat);
  }
  if (tau == 0.0) return 0.0;
  const double sd = std::sqrt(pd.latent_variance());
  const double h = (to_latent(tau, pd.transform) - pd.mu_hat) / (sd * std::numbers::sqrt2);
  return std::exp(log_jacobian(tau, pd.transform)) * std::numbers::sqrt2 / (kSqrtPi * sd) *
         hazard_ratio(h);
}

double predictive_quantile(double p, const PredictiveDensity& pd) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  // Bisect on the axis where the distribution is location-scale: latent t for
  // the AFT density, log tau for the Weibull one.
  double lo, hi;
  std::function<double(double)> cdf;
  std::function<double(double)> back;
  if (pd.kind == DensityKind::kHazardWeibull) {
    const double centre = -pd.mu_hat / pd.nu;
    lo = centre - 60.0 / pd.nu;
    hi = centre + 10.0 / pd.nu;
    cdf = [&](double y) { return -std::expm1(-std::exp(pd.nu * y + pd.mu_hat)); };
    back = [](double y) { return std::exp(y); };
  } else {
    const double sd = std::sqrt(pd.latent_variance());
    lo = pd.mu_hat - 40.0 * sd - 1.0;
    hi = pd.mu_hat + 40.0 * sd + 1.0;
    cdf = [&pd, sd](double t) { return 1.0 - std::exp(log_survival_gauss(t, pd.mu_hat, sd)); };
    back = [&](double t) { return from_latent(t, pd.transform); };
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-10 * std::max(1.0, std::abs(mid))) break;
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return back(0.5 * (lo + hi));
}

Moments predictive_moments(const PredictiveDensity& pd) {
  double error = 0.0;
  if (pd.kind == DensityKind::kHazardWeibull) {
    // z = nu log tau + f has density exp(z - e^z); tau = exp((z - f) / nu)
    const double nu = pd.nu;
    const double f = pd.mu_hat;
    auto tau_of = [&](double z) { return std::exp((z - f) / nu); };
    auto dens = [](double z) { return std::exp(z - std::exp(z)); };
    const double zmax = std::log(std::max(1.0, 4.0 / nu)) + 6.0;
    const std::vector<double> cuts{-60.0, -20.0, -5.0, -1.0, 1.0, 3.0, zmax};
    const double mean = panels([&](double z) { return tau_of(z) * dens(z); }, cuts, error);
    const double var = panels(
        [&](double z) {
          const double d = tau_of(z) - mean;
          return d * d * dens(z);
        },
        cuts, error);
    Moments m = finish(mean, var, error, mean * mean + var);
    m.understates_variance = true;
    return m;
  }
  const double sd = std::sqrt(pd.latent_variance());
  if (sd == 0.0) return finish(from_latent(pd.mu_hat, pd.transform), 0.0, 0.0, 1.0);
  if (!std::isfinite(sd) || !std::isfinite(pd.mu_hat)) {
    const double inf = std::numeric_limits<double>::infinity();
    return finish(inf, inf, inf, 1.0);
  }
  // integrate on the latent axis: E g(tau) = int g(from_latent(t)) N(t; mu, v) dt
  auto phi = [&](double t) {
    const double z = (t - pd.mu_hat) / sd;
    return std::exp(-0.5 * z * z - 0.5 * kLog2Pi) / sd;
  };
  std::vector<double> cuts;
  for (double k : {-12.0, -6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0, 8.0}) cuts.push_back(pd.mu_hat + k * sd);
  const double mean =
      panels([&](double t) { return from_latent(t, pd.transform) * phi(t); }, cuts, error);
  const double var = panels(
      [&](double t) {
        const double d = from_latent(t, pd.transform) - mean;
        return d * d * phi(t);
      },
      cuts, error);
  return finish(mean, var, error, mean * mean + var);
}

std::vector<double> survival_curve(const Eigen::VectorXd& x_star, const FittedModel& model,
                                   std::span<const double> grid, int risk) {
  check_grid(grid);
  const PredictiveDensity pd = predictive_density(x_star, model, risk);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double tau : grid) out.push_back(predictive_survival(tau, pd));
  return out;
}

std::vector<double> hazard_curve(const Eigen::VectorXd& x_star, const FittedModel& model,
                                 std::span<const double> grid, int risk) {
  check_grid(grid);
  const PredictiveDensity pd = predictive_density(x_star, model, risk);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double tau : grid) out.push_back(predictive_hazard(tau, pd));
  return out;
}

std::vector<double> disabled_risk_survival(const Eigen::VectorXd& x_star, const FittedModel& model,
                                           int risk, std::span<const double> grid) {
  if (!is_competing(model.hyper.kind)) {
    throw UnsupportedError("disabled-risk survival needs a competing-risks model");
  }
  if (risk != 1 && risk != 2) throw ValidationError("risk index must be 1 or 2");
  // Given the latent functions the two event times are independent, so the
  // marginal survival of one risk is its own predictive survival.
  return survival_curve(x_star, model, grid, risk);
}

Moments gp_hazard_predict(const Eigen::VectorXd& x_star, const FittedModel& model) {
  if (!is_hazard(model.hyper.kind)) throw UnsupportedError("gp_hazard_predict needs a GP hazard model");
  Moments m = predictive_moments(predictive_density(x_star, model));
  m.understates_variance = true;
  return m;
}

Moments predict_event_time(const Eigen::VectorXd& x_star, const FittedModel& model, int risk,
                           const PredictOptions& opts) {
  if (is_hazard(model.hyper.kind)) return gp_hazard_predict(x_star, model);
  return predictive_moments(predictive_density(x_star, model, risk, opts));
}

}  // namespace gpsurv
