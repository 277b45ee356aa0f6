#pragma once

#include <Eigen/Core>

#include "gpsurv/dataset.hpp"
#include "gpsurv/hyperparams.hpp"
#include "gpsurv/kernels.hpp"

namespace gpsurv {

/// Negative log posterior L(f) (per subject) with its gradient, and the diagonal
/// W_ii = -d^2/df_i^2 log p(D | f) of the data term (not divided by N).
struct NllReport {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd w_diag;
};

/// log p(D | f) with its gradient and W diagonal; the prior is not included.
struct DataTerm {
  double log_lik = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd w_diag;
};

/// One subject's contribution to the data log-likelihood as a function of its
/// latent value: log-value, first derivative, and minus the second derivative.
struct Contribution {
  double log_p = 0.0;
  double d1 = 0.0;
  double w = 0.0;
};

// Latent-axis Gaussian model, noise scale beta.
Contribution gauss_event(double t, double f, double beta);
Contribution gauss_censored(double t, double f, double beta);
/// log[S(t_lower) - S(t_upper)]; t_upper may be +inf.
Contribution gauss_interval(double t_lower, double t_upper, double f, double beta);

// Hazard model exp(f) * nu tau^(nu - 1) on raw times.
Contribution hazard_event(double tau, double f, double nu);
Contribution hazard_censored(double tau, double f, double nu);
/// log[S(tau_lower) - S(tau_upper)]; tau_upper may be +inf.
Contribution hazard_interval(double tau_lower, double tau_upper, double f, double nu);

/// Data term for `theta.kind` at latent vector f (length theta.latent_size(N)).
/// Subject contributions are summed in index order.
DataTerm data_term(const Eigen::VectorXd& f, const Observations& obs, const HyperParams& theta);

/// Constant added to L(f) beyond the likelihood and prior terms, as each model
/// family writes it: 0 (AFT), log 2 pi (competing), log(2 pi) / 2 (hazard).
double nll_constant(ModelKind kind);

/// Assemble L(f) = -log p(D|f)/N + (f-m)^T K^-1 (f-m)/(2N) + log|K|/(2N) + constant.
NllReport assemble_nll(const DataTerm& dt, const Eigen::VectorXd& f, double prior_mean,
                       const GramMatrix& k, Eigen::Index num_subjects, ModelKind kind);

/// Single-risk AFT model with exact and right-censored records. Interval
/// records raise UnsupportedError.
NllReport nll_single(const Eigen::VectorXd& f, const SurvivalDataset& data,
                     const HyperParams& theta, const GramMatrix& k);

/// Single-risk AFT model with interval and right-censored records. An interval
/// with lower >= upper raises DomainError.
NllReport nll_interval(const Eigen::VectorXd& f, const SurvivalDataset& data,
                       const HyperParams& theta, const GramMatrix& k);

/// Two competing risks; f = [f^1; f^2]. Each subject contributes its event
/// density to its own risk and survival terms to the other (both if censored).
NllReport nll_competing(const Eigen::VectorXd& f, const SurvivalDataset& data,
                        const HyperParams& theta, const GramMatrix& k);

/// Hazard model with Weibull baseline, exact and right-censored records.
NllReport nll_gp_hazard(const Eigen::VectorXd& f, const SurvivalDataset& data,
                        const HyperParams& theta, const GramMatrix& k);

/// Hazard model with interval and right-censored records.
NllReport nll_gp_hazard_interval(const Eigen::VectorXd& f, const SurvivalDataset& data,
                                 const HyperParams& theta, const GramMatrix& k);

/// Dispatch on theta.kind.
NllReport nll(const Eigen::VectorXd& f, const SurvivalDataset& data, const HyperParams& theta,
              const GramMatrix& k);

}  // namespace gpsurv
