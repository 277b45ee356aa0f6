#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "gpsurv/timescale.hpp"

namespace gpsurv {

enum class RecordKind : std::uint8_t {
  kExact,     // event of type `risk` observed at `time`
  kCensored,  // no event before `time`
  kInterval,  // event known to lie in (time, upper)
};

struct Record {
  RecordKind kind = RecordKind::kExact;
  int risk = 1;  // 0 for censored records
  double time = 1.0;
  double upper = 0.0;  // interval records only

  static Record exact(double t, int risk = 1) { return {RecordKind::kExact, risk, t, 0.0}; }
  static Record censored(double t) { return {RecordKind::kCensored, 0, t, 0.0}; }
  static Record interval(double lo, double hi) { return {RecordKind::kInterval, 1, lo, hi}; }
};

/// Covariates (one row per subject) and one time record per subject.
struct SurvivalDataset {
  Eigen::MatrixXd x;
  std::vector<Record> records;
  int num_risks = 1;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }

  /// Throws ValidationError on row-count mismatch, nonpositive or non-finite
  /// times, empty intervals, out-of-range risk labels or non-finite covariates.
  void validate() const;

  bool has(RecordKind kind) const;
  std::size_t count(RecordKind kind) const;
  std::size_t count_risk(int risk) const;

  /// Every finite time value (lower and upper bounds included).
  std::vector<double> all_times() const;

  /// Copy with every record whose index is in `keep` (in that order).
  SurvivalDataset subset(const std::vector<Eigen::Index>& keep) const;
};

/// Per-subject times on the axis a likelihood works on: latent times for the
/// accelerated-failure-time models, raw times for the hazard models. `upper`
/// is +inf for right-censored entries of interval-capable likelihoods.
struct Observations {
  std::vector<RecordKind> kind;
  std::vector<int> risk;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index size() const { return lower.size(); }
};

Observations latent_observations(const SurvivalDataset& data, const TransformConfig& cfg);
Observations raw_observations(const SurvivalDataset& data);

}  // namespace gpsurv
