#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gpsurv/inference.hpp"
#include "gpsurv/timescale.hpp"

namespace gpsurv {

enum class DensityKind {
  kAftGaussian,    // Gaussian N(mu_hat, kappa_hat + beta^2) on the latent axis
  kHazardWeibull,  // hazard exp(f*) nu tau^(nu-1) with plug-in f* = mu_hat
};

/// Event-time density for one test input, on the original time axis.
struct PredictiveDensity {
  DensityKind kind = DensityKind::kAftGaussian;
  double mu_hat = 0.0;
  double kappa_hat = 0.0;
  double beta = 1.0;
  TransformConfig transform;
  double nu = 1.0;

  double latent_variance() const { return kappa_hat + beta * beta; }
};

struct LatentPrediction {
  double mu_hat = 0.0;
  double kappa_hat = 0.0;
};

struct PredictOptions {
  /// Use k*^T K^-1 f_hat for the mean, which reverts to 0 rather than eta far
  /// from the data, instead of eta + k*^T K^-1 (f_hat - eta).
  bool omit_prior_mean = false;
};

/// Posterior mean and variance of the latent function at x_star. `risk`
/// selects the output of a competing-risks model (1 or 2) and is ignored
/// otherwise. Throws NotConvergedError for an unconverged model.
LatentPrediction predict_latent(const Eigen::VectorXd& x_star, const FittedModel& model,
                                int risk = 1, const PredictOptions& opts = {});

PredictiveDensity predictive_density(const Eigen::VectorXd& x_star, const FittedModel& model,
                                     int risk = 1, const PredictOptions& opts = {});

/// Density, survival and hazard at tau. tau = 0 is accepted (S = 1); tau < 0
/// raises DomainError.
double predictive_pdf(double tau, const PredictiveDensity& pd);
double predictive_survival(double tau, const PredictiveDensity& pd);
double predictive_hazard(double tau, const PredictiveDensity& pd);

/// Time at which the survival function equals 1 - p, by bisection.
double predictive_quantile(double p, const PredictiveDensity& pd);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  /// Quadrature could not certify its tolerance (very wide density).
  bool wide = false;
  /// Plug-in predictions ignore the latent uncertainty and understate the variance.
  bool understates_variance = false;
  std::string warning;
};

/// Mean and variance of the event time by adaptive Gauss-Kronrod quadrature.
Moments predictive_moments(const PredictiveDensity& pd);

/// Curves over a nondecreasing grid of times >= 0. ValidationError for an
/// unsorted grid.
std::vector<double> survival_curve(const Eigen::VectorXd& x_star, const FittedModel& model,
                                   std::span<const double> grid, int risk = 1);
std::vector<double> hazard_curve(const Eigen::VectorXd& x_star, const FittedModel& model,
                                 std::span<const double> grid, int risk = 1);

/// Marginal survival of `risk` with every other risk removed (competing-risks
/// models only).
std::vector<double> disabled_risk_survival(const Eigen::VectorXd& x_star, const FittedModel& model,
                                           int risk, std::span<const double> grid);

/// Plug-in event-time moments for the GP hazard model.
Moments gp_hazard_predict(const Eigen::VectorXd& x_star, const FittedModel& model);

/// Event-time moments for any fitted GP model (hazard models use the plug-in).
Moments predict_event_time(const Eigen::VectorXd& x_star, const FittedModel& model, int risk = 1,
                           const PredictOptions& opts = {});

}  // namespace gpsurv
