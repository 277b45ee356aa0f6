#pragma once

// Seeded random instances and finite-difference helpers shared by the unit
// tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "gpsurv/dataset.hpp"
#include "gpsurv/hyperparams.hpp"
#include "gpsurv/likelihoods.hpp"
#include "gpsurv/random.hpp"

namespace gpsurv::testing {

struct Instance {
  SurvivalDataset data;
  HyperParams theta;
  Eigen::VectorXd f;
};

inline double log_uniform(Philox4x32& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

// Random dataset, hyperparameters and latent point for `kind`: n subjects in
// d dimensions, roughly a third censored, latent values near the data.
inline Instance random_instance(ModelKind kind, std::uint64_t seed, Eigen::Index n = 10,
                                Eigen::Index d = 2) {
  Philox4x32 rng(seed, 77);
  Instance in;
  in.data.x.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) in.data.x(i, k) = rng.uniform(-2.0, 2.0);
  in.data.num_risks = is_competing(kind) ? 2 : 1;
  const bool interval = accepts_intervals(kind);
  const bool hazard = is_hazard(kind);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = hazard ? log_uniform(rng, 0.2, 5.0) : rng.uniform(1.0, 8.0);
    const double u = rng.uniform();
    if (u < 0.33) {
      in.data.records.push_back(Record::censored(t));
    } else if (interval) {
      in.data.records.push_back(Record::interval(t, t + log_uniform(rng, 0.05, 3.0)));
    } else {
      const int risk = is_competing(kind) && u > 0.66 ? 2 : 1;
      in.data.records.push_back(Record::exact(t, risk));
    }
  }

  HyperParams& th = in.theta;
  th.kind = kind;
  th.transform.gamma = hazard ? 1.0 : 0.5;
  th.eta = rng.uniform(1.0, 8.0);
  th.beta = log_uniform(rng, 0.2, 2.0);
  th.nu = log_uniform(rng, 0.5, 4.0);
  th.single.sigma = log_uniform(rng, 0.5, 4.0);
  th.single.lengthscales = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return log_uniform(rng, 0.5, 2.0); });
  th.multi.sigma = log_uniform(rng, 0.2, 2.0);
  th.multi.omega = log_uniform(rng, 0.2, 2.0);
  th.multi.mu = rng.uniform(-1.0, 1.0);
  th.multi.lengthscales = Eigen::VectorXd::Constant(1, log_uniform(rng, 0.5, 2.0));

  // A prior draw: arbitrary f can make the quadratic prior term so large that
  // finite differences of the value drown in roundoff.
  const GramMatrix k = build_gram(in.data.x, th);
  Eigen::VectorXd z(th.latent_size(n));
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
  in.f = (k.factor().matrixL() * z).eval();
  in.f.array() += hazard ? -0.5 : th.eta;
  return in;
}

// Central difference of a scalar function along coordinate j.
inline double central_diff(const std::function<double(const Eigen::VectorXd&)>& fn,
                           const Eigen::VectorXd& x, Eigen::Index j, double h) {
  Eigen::VectorXd a = x, b = x;
  a[j] += h;
  b[j] -= h;
  return (fn(a) - fn(b)) / (2.0 * h);
}

inline double second_diff(const std::function<double(const Eigen::VectorXd&)>& fn,
                          const Eigen::VectorXd& x, Eigen::Index j, double h) {
  Eigen::VectorXd a = x, b = x;
  a[j] += h;
  b[j] -= h;
  return (fn(a) - 2.0 * fn(x) + fn(b)) / (h * h);
}

// Richardson-extrapolated second difference (error O(h^4)).
inline double second_diff_richardson(const std::function<double(const Eigen::VectorXd&)>& fn,
                                     const Eigen::VectorXd& x, Eigen::Index j, double h) {
  return (4.0 * second_diff(fn, x, j, 0.5 * h) - second_diff(fn, x, j, h)) / 3.0;
}

inline bool close(double got, double want, double rel, double abs_floor) {
  return std::abs(got - want) <= std::max(rel * std::abs(want), abs_floor);
}

// Observations of a single subject, so the data term depends on that
// subject's latent values only (and stays small, keeping roundoff low).
inline Observations one_subject(const Observations& obs, Eigen::Index i) {
  Observations o;
  o.kind = {obs.kind[static_cast<std::size_t>(i)]};
  o.risk = {obs.risk[static_cast<std::size_t>(i)]};
  o.lower = Eigen::VectorXd::Constant(1, obs.lower[i]);
  o.upper = Eigen::VectorXd::Constant(1, obs.upper[i]);
  return o;
}

struct FdReport {
  int checked = 0;
  int failed = 0;
  double worst = 0.0;  // worst |err| / allowed
};

// Analytic gradient of nll against central differences of its value.
inline FdReport check_gradient(const Instance& in, double rel = 1e-5, double abs_floor = 1e-8) {
  const GramMatrix k = build_gram(in.data.x, in.theta);
  const auto value = [&](const Eigen::VectorXd& f) { return nll(f, in.data, in.theta, k).value; };
  const NllReport rep = nll(in.f, in.data, in.theta, k);
  FdReport out;
  for (Eigen::Index j = 0; j < in.f.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(in.f[j]));
    const double fd = central_diff(value, in.f, j, h);
    const double allowed = std::max(rel * std::abs(fd), abs_floor);
    const double err = std::abs(rep.grad[j] - fd);
    out.worst = std::max(out.worst, err / allowed);
    ++out.checked;
    if (err > allowed) ++out.failed;
  }
  return out;
}

// w_diag against second differences of the data log-likelihood, one subject
// at a time.
inline FdReport check_w(const Instance& in, double rel = 1e-4, double abs_floor = 1e-8) {
  const Observations obs = observations_for(in.data, in.theta);
  const DataTerm full = data_term(in.f, obs, in.theta);
  const Eigen::Index n = in.data.size();
  const int outputs = is_competing(in.theta.kind) ? 2 : 1;
  FdReport out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Observations o = one_subject(obs, i);
    Eigen::VectorXd fi(outputs);
    for (int r = 0; r < outputs; ++r) fi[r] = in.f[r * n + i];
    const auto ll = [&](const Eigen::VectorXd& g) { return data_term(g, o, in.theta).log_lik; };
    for (int r = 0; r < outputs; ++r) {
      const double h = 2e-3 * std::max(1.0, std::abs(fi[r]));
      const double fd = -second_diff_richardson(ll, fi, r, h);
      const double got = full.w_diag[r * n + i];
      const double allowed = std::max(rel * std::abs(fd), abs_floor);
      const double err = std::abs(got - fd);
      out.worst = std::max(out.worst, err / allowed);
      ++out.checked;
      if (err > allowed) ++out.failed;
    }
  }
  return out;
}

}  // namespace gpsurv::testing
