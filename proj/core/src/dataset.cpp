#include "gpsurv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gpsurv/error.hpp"

namespace gpsurv {

void SurvivalDataset::validate() const {
  if (static_cast<std::size_t>(x.rows()) != records.size()) {
    throw ValidationError("covariate rows (" + std::to_string(x.rows()) +
                          ") do not match records (" + std::to_string(records.size()) + ")");
  }
  if (records.empty()) throw ValidationError("dataset is empty");
  if (num_risks < 1) throw ValidationError("dataset must declare at least one risk");
  if (!x.allFinite()) throw ValidationError("covariates must be finite");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    const std::string where = " (row " + std::to_string(i) + ")";
    if (!(r.time > 0.0) || !std::isfinite(r.time)) {
      throw ValidationError("times must be positive and finite" + where);
    }
    switch (r.kind) {
      case RecordKind::kExact:
        if (r.risk < 1 || r.risk > num_risks) throw ValidationError("risk label out of range" + where);
        break;
      case RecordKind::kCensored:
        if (r.risk != 0) throw ValidationError("censored records carry risk 0" + where);
        break;
      case RecordKind::kInterval:
        if (!(r.upper > r.time) || !std::isfinite(r.upper)) {
          throw ValidationError("interval upper bound must exceed lower bound" + where);
        }
        if (r.risk < 1 || r.risk > num_risks) throw ValidationError("risk label out of range" + where);
        break;
    }
  }
}

bool SurvivalDataset::has(RecordKind kind) const {
  return std::any_of(records.begin(), records.end(), [&](const Record& r) { return r.kind == kind; });
}

std::size_t SurvivalDataset::count(RecordKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const Record& r) { return r.kind == kind; }));
}

std::size_t SurvivalDataset::count_risk(int risk) const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const Record& r) {
    return r.kind != RecordKind::kCensored && r.risk == risk;
  }));
}

std::vector<double> SurvivalDataset::all_times() const {
  std::vector<double> out;
  out.reserve(records.size() * 2);
  for (const Record& r : records) {
    out.push_back(r.time);
    if (r.kind == RecordKind::kInterval) out.push_back(r.upper);
  }
  return out;
}

SurvivalDataset SurvivalDataset::subset(const std::vector<Eigen::Index>& keep) const {
  SurvivalDataset out;
  out.num_risks = num_risks;
  out.x.resize(static_cast<Eigen::Index>(keep.size()), x.cols());
  out.records.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(keep[i]);
    out.records.push_back(records[static_cast<std::size_t>(keep[i])]);
  }
  return out;
}

namespace {

template <typename Map>
Observations observe(const SurvivalDataset& data, Map&& map) {
  const auto n = static_cast<Eigen::Index>(data.records.size());
  Observations obs;
  obs.kind.reserve(data.records.size());
  obs.risk.reserve(data.records.size());
  obs.lower.resize(n);
  obs.upper.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Record& r = data.records[static_cast<std::size_t>(i)];
    obs.kind.push_back(r.kind);
    obs.risk.push_back(r.risk);
    obs.lower[i] = map(r.time);
    obs.upper[i] = r.kind == RecordKind::kInterval ? map(r.upper)
                                                   : std::numeric_limits<double>::infinity();
  }
  return obs;
}

}  // namespace

Observations latent_observations(const SurvivalDataset& data, const TransformConfig& cfg) {
  return observe(data, [&](double tau) { return to_latent(tau, cfg); });
}

Observations raw_observations(const SurvivalDataset& data) {
  return observe(data, [](double tau) { return tau; });
}

}  // namespace gpsurv
