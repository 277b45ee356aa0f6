#pragma once

#include <Eigen/Core>

#include "gpsurv/dataset.hpp"
#include "gpsurv/optim.hpp"
#include "gpsurv/prediction.hpp"

namespace gpsurv {

/// Weibull proportional hazards: hazard (nu / rho) (tau / rho)^(nu - 1) exp(beta . x).
struct WphmParams {
  Eigen::VectorXd beta;
  double rho = 1.0;
  double nu = 1.0;

  void validate(Eigen::Index dim) const;
};

/// Negative log likelihood (per subject) in coordinates z = [beta, log rho,
/// log nu], with gradient and Hessian. Exact records of `risk` are events;
/// everything else is right-censored at its time.
SecondOrder wphm_objective(const SurvivalDataset& data, const Eigen::VectorXd& z, int risk = 1);

double wphm_nll(const SurvivalDataset& data, const WphmParams& params, int risk = 1);

Eigen::VectorXd pack_wphm(const WphmParams& params);
WphmParams unpack_wphm(const Eigen::VectorXd& z);

struct WphmFit {
  WphmParams params;
  double nll = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  int risk = 1;
};

/// Maximum likelihood by damped Newton from beta = 0, nu = 1, rho = median
/// event time. Interval records raise UnsupportedError; data without any
/// event of `risk` raise ValidationError (parameters unidentifiable).
WphmFit fit_wphm(const SurvivalDataset& data, int risk = 1);

/// The Weibull density for covariates x as a hazard-kind PredictiveDensity.
PredictiveDensity wphm_density(const Eigen::VectorXd& x, const WphmParams& params);

/// Event-time mean and variance at x by quadrature.
Moments wphm_predict_mean(const Eigen::VectorXd& x, const WphmParams& params);

/// rho exp(-beta.x / nu) Gamma(1 + 1/nu).
double wphm_mean_closed_form(const Eigen::VectorXd& x, const WphmParams& params);

}  // namespace gpsurv
