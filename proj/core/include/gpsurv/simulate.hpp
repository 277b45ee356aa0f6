#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gpsurv/baselines.hpp"
#include "gpsurv/dataset.hpp"
#include "gpsurv/hyperparams.hpp"
#include "gpsurv/inference.hpp"

namespace gpsurv {

enum class SimKind { kGpSingle, kGpCompeting, kWphm };

std::string_view to_string(SimKind kind);
SimKind parse_sim_kind(std::string_view name);

/// Generator settings. Covariates are uniform on `box`; the GP kinds draw from
/// the prior of `theta` (its transform gives the time scale, gamma = 1 by
/// default), the WPHM kind from `wphm` by inverse-CDF sampling.
///
/// Censoring: a random subset of subjects is censored at a uniform time in
/// (0, tau). Its size is floor(censor_fraction * n), or, when
/// `censored_total` is set, censored_total minus the number of subjects the
/// cutoff censors (then drawn only among subjects the cutoff leaves alone).
/// Afterwards every time beyond `cutoff` is censored at the cutoff.
struct SimSpec {
  SimKind kind = SimKind::kGpSingle;
  Eigen::Index n = 25;
  std::vector<Range> box{{-3.0, 3.0}};
  HyperParams theta;
  WphmParams wphm;
  double censor_fraction = 0.0;
  std::optional<int> censored_total;
  std::optional<double> cutoff;
  /// Extra subjects drawn jointly with the training set (same latent
  /// function), returned uncensored for validation.
  Eigen::Index holdout = 0;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(box.size()); }
  void validate() const;
};

/// Ground truth per subject: latent function values (one column per risk;
/// WPHM: beta . x) and the uncensored event time of every risk.
struct SimTruth {
  Eigen::MatrixXd f;
  Eigen::MatrixXd tau;
};

struct SimResult {
  SurvivalDataset data;
  SimTruth truth;
  SurvivalDataset holdout;
  SimTruth holdout_truth;
};

SimResult simulate(const SimSpec& spec);
SimResult simulate_gp_single(const SimSpec& spec);
SimResult simulate_gp_competing(const SimSpec& spec);
SimResult simulate_wphm(const SimSpec& spec);

/// Replace each exact event tau by the interval (tau - u, tau - u + width),
/// u uniform on [0, min(width, tau)). Censored records are kept.
SurvivalDataset intervalize(const SurvivalDataset& data, double width, std::uint64_t seed);

}  // namespace gpsurv
