#include "gpsurv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gpsurv/error.hpp"
#include "gpsurv/random.hpp"

namespace gpsurv {

std::string_view to_string(SimKind kind) {
  switch (kind) {
    case SimKind::kGpSingle: return "gp-single";
    case SimKind::kGpCompeting: return "gp-competing";
    case SimKind::kWphm: return "wphm";
  }
  return "unknown";
}

SimKind parse_sim_kind(std::string_view name) {
  for (SimKind k : {SimKind::kGpSingle, SimKind::kGpCompeting, SimKind::kWphm}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown simulation kind '" + std::string(name) + "'");
}

void SimSpec::validate() const {
  if (n < 1) throw ValidationError("simulation needs n >= 1");
  if (holdout < 0) throw ValidationError("holdout must be nonnegative");
  if (box.empty()) throw ValidationError("covariate box needs at least one dimension");
  for (const Range& r : box) {
    if (!(r.lo < r.hi)) throw ValidationError("covariate box needs low < high in every dimension");
  }
  if (!(censor_fraction >= 0.0 && censor_fraction < 1.0)) {
    throw ValidationError("censor_fraction must lie in [0, 1)");
  }
  if (censored_total && (*censored_total < 0 || *censored_total > n)) {
    throw ValidationError("censored_total must lie in [0, n]");
  }
  if (cutoff && !(*cutoff > 0.0)) throw ValidationError("cutoff must be positive");
  if (kind == SimKind::kWphm) {
    wphm.validate(dim());
  } else {
    HyperParams th = theta;
    th.kind = kind == SimKind::kGpCompeting ? ModelKind::kGpCompeting : ModelKind::kGpAft;
    th.validate(dim());
  }
}

namespace {

Eigen::MatrixXd draw_covariates(const SimSpec& spec, Eigen::Index rows, Philox4x32& rng) {
  Eigen::MatrixXd x(rows, spec.dim());
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < spec.dim(); ++k) {
      const Range& r = spec.box[static_cast<std::size_t>(k)];
      x(i, k) = rng.uniform(r.lo, r.hi);
    }
  }
  return x;
}

// Draw m + L z for the Gram matrix of the given hyperparameters.
Eigen::VectorXd draw_prior(const Eigen::MatrixXd& x, const HyperParams& theta, Philox4x32& rng) {
  const GramMatrix k = build_gram(x, theta);
  Eigen::VectorXd z(k.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return (k.factor().matrixL() * z).array() + theta.prior_mean();
}

double open_uniform(Philox4x32& rng) {
  double u = rng.uniform();
  while (u == 0.0) u = rng.uniform();
  return u;
}

// Censoring on the first spec.n subjects: records already hold exact events.
void apply_censoring(const SimSpec& spec, std::vector<Record>& records, Philox4x32& rng) {
  const std::size_t n = records.size();
  std::vector<std::size_t> pool;
  std::size_t draw = 0;
  if (spec.censored_total) {
    std::size_t by_cutoff = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (spec.cutoff && records[i].time > *spec.cutoff) {
        ++by_cutoff;
      } else {
        pool.push_back(i);
      }
    }
    const auto target = static_cast<std::size_t>(*spec.censored_total);
    if (by_cutoff > target) {
      throw ValidationError("the cutoff alone censors " + std::to_string(by_cutoff) +
                            " subjects, more than censored_total=" + std::to_string(target));
    }
    draw = target - by_cutoff;
  } else {
    pool.resize(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    draw = static_cast<std::size_t>(std::floor(spec.censor_fraction * static_cast<double>(n)));
  }
  // partial Fisher-Yates: the first `draw` entries become the censored subset
  for (std::size_t k = 0; k < draw; ++k) {
    const std::size_t span = pool.size() - k;
    const std::size_t j = k + std::min(span - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(span)));
    std::swap(pool[k], pool[j]);
  }
  std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(draw));
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t i : chosen) {
    records[i] = Record::censored(records[i].time * open_uniform(rng));
  }
  if (spec.cutoff) {
    for (Record& r : records) {
      if (r.time > *spec.cutoff) r = Record::censored(*spec.cutoff);
    }
  }
}

SimResult split(const SimSpec& spec, const Eigen::MatrixXd& x, const std::vector<Record>& all,
                const SimTruth& truth, int num_risks, Philox4x32& rng) {
  const Eigen::Index n = spec.n;
  const Eigen::Index h = spec.holdout;
  SimResult out;
  out.data.x = x.topRows(n);
  out.data.records.assign(all.begin(), all.begin() + n);
  out.data.num_risks = num_risks;
  out.truth = {truth.f.topRows(n), truth.tau.topRows(n)};
  apply_censoring(spec, out.data.records, rng);

  out.holdout.x = x.bottomRows(h);
  out.holdout.records.assign(all.begin() + n, all.end());
  out.holdout.num_risks = num_risks;
  out.holdout_truth = {truth.f.bottomRows(h), truth.tau.bottomRows(h)};
  return out;
}

}  // namespace

// Draw order for every generator: covariates (row-major), latent values,
// noise, then censoring subset and censoring times.

SimResult simulate_gp_single(const SimSpec& spec) {
  spec.validate();
  HyperParams th = spec.theta;
  th.kind = ModelKind::kGpAft;
  Philox4x32 rng(spec.seed);
  const Eigen::Index total = spec.n + spec.holdout;
  const Eigen::MatrixXd x = draw_covariates(spec, total, rng);
  const Eigen::VectorXd f = draw_prior(x, th, rng);

  SimTruth truth{f, Eigen::MatrixXd(total, 1)};
  std::vector<Record> records;
  for (Eigen::Index i = 0; i < total; ++i) {
    const double t = f[i] + th.beta * rng.normal();
    truth.tau(i, 0) = from_latent(t, th.transform);
    records.push_back(Record::exact(truth.tau(i, 0), 1));
  }
  return split(spec, x, records, truth, 1, rng);
}

SimResult simulate_gp_competing(const SimSpec& spec) {
  spec.validate();
  HyperParams th = spec.theta;
  th.kind = ModelKind::kGpCompeting;
  Philox4x32 rng(spec.seed);
  const Eigen::Index total = spec.n + spec.holdout;
  const Eigen::MatrixXd x = draw_covariates(spec, total, rng);
  const Eigen::VectorXd f = draw_prior(x, th, rng);

  SimTruth truth{Eigen::MatrixXd(total, 2), Eigen::MatrixXd(total, 2)};
  truth.f.col(0) = f.head(total);
  truth.f.col(1) = f.tail(total);
  std::vector<Record> records;
  for (Eigen::Index i = 0; i < total; ++i) {
    for (int r = 0; r < 2; ++r) {
      truth.tau(i, r) = from_latent(truth.f(i, r) + th.beta * rng.normal(), th.transform);
    }
    const int risk = truth.tau(i, 1) < truth.tau(i, 0) ? 2 : 1;
    records.push_back(Record::exact(truth.tau(i, risk - 1), risk));
  }
  return split(spec, x, records, truth, 2, rng);
}

SimResult simulate_wphm(const SimSpec& spec) {
  spec.validate();
  const WphmParams& p = spec.wphm;
  Philox4x32 rng(spec.seed);
  const Eigen::Index total = spec.n + spec.holdout;
  const Eigen::MatrixXd x = draw_covariates(spec, total, rng);

  SimTruth truth{Eigen::MatrixXd(total, 1), Eigen::MatrixXd(total, 1)};
  std::vector<Record> records;
  for (Eigen::Index i = 0; i < total; ++i) {
    const double lin = p.beta.dot(x.row(i).transpose());
    const double z = rng.uniform();
    // rho (-e^{-beta.x} log(1 - z))^{1/nu}; z = 0 would give tau = 0
    const double tail = -std::log1p(-(z == 0.0 ? open_uniform(rng) : z));
    truth.f(i, 0) = lin;
    truth.tau(i, 0) = p.rho * std::pow(std::exp(-lin) * tail, 1.0 / p.nu);
    records.push_back(Record::exact(truth.tau(i, 0), 1));
  }
  return split(spec, x, records, truth, 1, rng);
}

SimResult simulate(const SimSpec& spec) {
  switch (spec.kind) {
    case SimKind::kGpSingle: return simulate_gp_single(spec);
    case SimKind::kGpCompeting: return simulate_gp_competing(spec);
    case SimKind::kWphm: return simulate_wphm(spec);
  }
  throw ValidationError("unknown simulation kind");
}

SurvivalDataset intervalize(const SurvivalDataset& data, double width, std::uint64_t seed) {
  if (!(width > 0.0) || !std::isfinite(width)) throw ValidationError("interval width must be positive");
  if (data.has(RecordKind::kInterval)) throw ValidationError("dataset already holds interval records");
  Philox4x32 rng(seed);
  SurvivalDataset out = data;
  for (Record& r : out.records) {
    if (r.kind != RecordKind::kExact) continue;
    const double u = std::min(width, r.time) * rng.uniform();
    const double lower = r.time - u;
    Record iv = Record::interval(lower, lower + width);
    iv.risk = r.risk;
    r = iv;
  }
  return out;
}

}  // namespace gpsurv
