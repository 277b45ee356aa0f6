#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "gpsurv/dataset.hpp"
#include "gpsurv/hyperparams.hpp"
#include "gpsurv/kernels.hpp"

namespace gpsurv {

struct MapOptions {
  int max_iterations = 200;
  double grad_tol = 1e-6;  // inf-norm of dL/df
  bool record_trace = false;
  /// Starting latent vector; defaults to the prior mean.
  std::optional<Eigen::VectorXd> initial_f;
};

/// MAP latent vector for fixed hyperparameters, with everything prediction and
/// the Laplace approximation need.
struct FittedModel {
  HyperParams hyper;
  SurvivalDataset data;
  GramMatrix gram;
  Eigen::VectorXd f_hat;
  Eigen::VectorXd alpha;   // K^-1 (f_hat - m)
  Eigen::VectorXd w_diag;  // -d^2 log p(D|f) / df_i^2 at f_hat
  bool converged = false;
  double final_grad_norm = 0.0;
  int iterations = 0;
  double nll_value = 0.0;  // L(f_hat)
  std::vector<double> trace;  // L at every accepted iterate when requested

  /// Posterior precision pieces. When every w_ii >= 0, `b_factor` holds the
  /// Cholesky factor of B = I + W^1/2 K W^1/2; otherwise `iwk` holds the LU
  /// factorization of I + W K.
  bool w_nonnegative = true;
  Eigen::LLT<Eigen::MatrixXd> b_factor;
  Eigen::PartialPivLU<Eigen::MatrixXd> iwk;

  /// log|W + K^-1|. Throws NumericError if W + K^-1 is not positive definite.
  double log_det_posterior_precision() const;
  /// Rebuild the Gram matrix and posterior factors from hyper, data, f_hat and alpha.
  void refresh_factors();
};

/// Newton iterations on the latent vector (parametrized as f = m + K a, so no
/// explicit K^-1 is formed) with backtracking. On non-convergence the best
/// iterate is returned with converged = false.
FittedModel fit_map(const SurvivalDataset& data, const HyperParams& theta,
                    const MapOptions& opts = {});

/// The Laplace objective L(f_hat) - log(2 pi)/2 + log|W + K^-1| / (2N).
/// Inner non-convergence, ill-conditioning or a non-PD precision yields
/// kLaplaceFailure.
double laplace_nll_hyp(const HyperParams& theta, const SurvivalDataset& data);

inline constexpr double kLaplaceFailure = 1e10;

/// Laplace objective for an already fitted model.
double laplace_value(const FittedModel& model);

struct LaplaceEval {
  double value = kLaplaceFailure;
  bool ok = false;
  std::string failure;
  std::optional<FittedModel> model;
};

LaplaceEval laplace_evaluate(const HyperParams& theta, const SurvivalDataset& data,
                             const MapOptions& opts = {});

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Box constraints for the outer search. Positive parameters are searched in
/// log space; eta and mu linearly.
struct HyperBounds {
  Range eta, mu, beta, sigma, omega, nu;
  std::vector<Range> lengthscale;  // one per searched length scale
};

/// Hyperparameter template for `kind` on `data`: transform gamma from the
/// data's smallest time, unit parameters, one length scale per covariate
/// (competing: one shared length scale unless `ard`).
HyperParams make_template(ModelKind kind, const SurvivalDataset& data, bool ard = false);

/// Data-scaled default bounds for the free parameters of `templ`.
HyperBounds default_bounds(const SurvivalDataset& data, const HyperParams& templ);

/// Data-driven starting point (first restart).
HyperParams heuristic_start(const SurvivalDataset& data, const HyperParams& templ,
                            const HyperBounds& bounds);

struct HyperFitOptions {
  int restarts = 10;
  std::uint64_t seed = 0;
  int max_evals = 600;   // per restart
  double x_tol = 1e-4;   // simplex size in packed coordinates
  double f_tol = 1e-7;
  bool heuristic_first = true;
  /// Replaces the first start (heuristic or random) when set.
  std::optional<HyperParams> start;
  MapOptions map;  // inner MAP settings during the search
};

struct RestartRecord {
  HyperParams start;
  HyperParams theta;
  double value = kLaplaceFailure;
  int evaluations = 0;
  bool converged = false;
};

struct HyperFit {
  HyperParams theta;
  double value = kLaplaceFailure;
  FittedModel model;  // MAP at theta
  std::vector<RestartRecord> restarts;
  int best_restart = 0;
};

/// Multi-start Nelder-Mead on the Laplace objective. Starts are drawn in order
/// from one seeded generator; the lowest value wins, earlier restarts on ties.
/// Throws NotConvergedError if every restart ends at kLaplaceFailure.
HyperFit fit_hyperparameters(const SurvivalDataset& data, const HyperParams& templ,
                             const HyperBounds& bounds, const HyperFitOptions& opts = {});

/// Packing between HyperParams and the optimizer's coordinates (exposed for tests).
struct HyperPacking {
  HyperParams templ;
  HyperBounds bounds;
  double eta_center = 0.0;
  double eta_scale = 1.0;
  double mu_scale = 1.0;

  HyperPacking(const HyperParams& templ, const HyperBounds& bounds);
  Eigen::Index size() const;
  Eigen::VectorXd pack(const HyperParams& theta) const;
  /// Clamps to the bounds; `excess` receives the squared distance clamped away.
  HyperParams unpack(const Eigen::VectorXd& z, double* excess = nullptr) const;
};

}  // namespace gpsurv
