#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gpsurv/dataset.hpp"
#include "gpsurv/kernels.hpp"
#include "gpsurv/timescale.hpp"

namespace gpsurv {

enum class ModelKind {
  kGpAft,               // Gaussian noise on the latent axis, exact + right-censored records
  kGpAftInterval,       // same, interval + right-censored records
  kGpCompeting,         // two-output GP, two competing risks + right censoring
  kGpHazard,            // hazard exp(f) * Weibull baseline, exact + right-censored
  kGpHazardInterval,    // same, interval + right-censored records
};

std::string_view to_string(ModelKind kind);
/// Accepts the names produced by to_string. Throws ValidationError otherwise.
ModelKind parse_model_kind(std::string_view name);

bool is_competing(ModelKind kind);
bool is_hazard(ModelKind kind);
bool accepts_intervals(ModelKind kind);

/// Hyperparameters for every GP model family; each kind reads only its fields:
///   AFT:       eta, beta, single, transform
///   competing: eta, beta, multi, transform
///   hazard:    single, nu (zero prior mean, raw time axis)
struct HyperParams {
  ModelKind kind = ModelKind::kGpAft;
  double eta = 0.0;
  double beta = 1.0;
  SingleKernelParams single;
  MultiKernelParams multi;
  double nu = 1.0;
  TransformConfig transform;
  bool omega_pinned = false;  // competing only: omega fixed at 0 during fitting

  void validate(Eigen::Index dim) const;

  /// Prior mean of every latent component (0 for the hazard models).
  double prior_mean() const { return is_hazard(kind) ? 0.0 : eta; }
  /// Latent dimension for a dataset of n subjects.
  Eigen::Index latent_size(Eigen::Index n) const { return is_competing(kind) ? 2 * n : n; }
  /// Prior variance of a single latent output at any input.
  double prior_variance(Eigen::Index dim) const;

  std::string describe() const;
};

/// Copy with omega pinned to 0 (competing kind only; UnsupportedError otherwise).
HyperParams force_independent(const HyperParams& theta);

GramMatrix build_gram(const Eigen::MatrixXd& x, const HyperParams& theta);

/// Cross-covariance between x_star and the training inputs for output `risk`
/// (ignored unless competing).
Eigen::VectorXd cross_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_star, int risk,
                          const HyperParams& theta);

/// Times on the axis the model's likelihood uses.
Observations observations_for(const SurvivalDataset& data, const HyperParams& theta);

/// Throws UnsupportedError when the dataset holds records the model cannot use.
void check_compatible(const SurvivalDataset& data, ModelKind kind);

}  // namespace gpsurv
