#include "gpsurv/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gpsurv/error.hpp"
#include "gpsurv/likelihoods.hpp"
#include "gpsurv/optim.hpp"
#include "gpsurv/random.hpp"

namespace gpsurv {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Factorizations of the posterior precision at f_hat; gram must be current.
void factor_posterior(FittedModel& m) {
  const Eigen::MatrixXd k = m.gram.jittered();
  m.w_nonnegative = (m.w_diag.array() >= 0.0).all();
  if (m.w_nonnegative) {
    const Eigen::VectorXd s = m.w_diag.cwiseSqrt();
    Eigen::MatrixXd b = s.asDiagonal() * k * s.asDiagonal();
    b.diagonal().array() += 1.0;
    m.b_factor.compute(b);
    if (m.b_factor.info() != Eigen::Success) throw NumericError("I + W^1/2 K W^1/2 factorization failed");
    m.iwk = Eigen::PartialPivLU<Eigen::MatrixXd>();
  } else {
    Eigen::MatrixXd a = m.w_diag.asDiagonal() * k;
    a.diagonal().array() += 1.0;
    m.iwk.compute(a);
    m.b_factor = Eigen::LLT<Eigen::MatrixXd>();
  }
}

struct Sample {
  double psi = std::numeric_limits<double>::infinity();  // N * (L - log|K|/(2N) - const)
  Eigen::VectorXd f;
  DataTerm dt;
};

double column_std(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

// Times on the model's axis, one per subject (interval midpoints on that axis).
Eigen::VectorXd axis_times(const SurvivalDataset& data, const HyperParams& templ) {
  const Observations obs = observations_for(data, templ);
  Eigen::VectorXd t = obs.lower;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (std::isfinite(obs.upper[i])) t[i] = 0.5 * (obs.lower[i] + obs.upper[i]);
  }
  return t;
}

Eigen::VectorXd covariate_scales(const SurvivalDataset& data) {
  Eigen::VectorXd s(data.dim());
  for (Eigen::Index k = 0; k < data.dim(); ++k) {
    const double v = column_std(data.x.col(k));
    s[k] = v > 1e-12 ? v : 1.0;
  }
  return s;
}

double clamp_to(double v, const Range& r) { return std::clamp(v, r.lo, r.hi); }

}  // namespace

double FittedModel::log_det_posterior_precision() const {
  if (w_nonnegative) {
    const double log_det_b = 2.0 * b_factor.matrixLLT().diagonal().array().log().sum();
    return log_det_b - gram.log_det();
  }
  // det(W + K^-1) = det(I + W K) / det(K); sign from the LU pivots
  const auto& lu = iwk.matrixLU();
  double log_abs = 0.0;
  int negatives = 0;
  for (Eigen::Index i = 0; i < lu.rows(); ++i) {
    const double u = lu(i, i);
    if (u == 0.0) throw NumericError("W + K^-1 is singular");
    if (u < 0.0) ++negatives;
    log_abs += std::log(std::abs(u));
  }
  const double sign = (negatives % 2 ? -1.0 : 1.0) * iwk.permutationP().determinant();
  if (sign <= 0.0) throw NumericError("W + K^-1 is not positive definite");
  return log_abs - gram.log_det();
}

void FittedModel::refresh_factors() {
  gram = build_gram(data.x, hyper);
  factor_posterior(*this);
}

FittedModel fit_map(const SurvivalDataset& data, const HyperParams& theta, const MapOptions& opts) {
  data.validate();
  theta.validate(data.dim());
  check_compatible(data, theta.kind);

  FittedModel m;
  m.hyper = theta;
  m.data = data;
  m.gram = build_gram(data.x, theta);

  const Observations obs = observations_for(data, theta);
  const Eigen::Index n = data.size();
  const Eigen::Index len = theta.latent_size(n);
  const double big_n = static_cast<double>(n);
  const double mean = theta.prior_mean();
  const Eigen::MatrixXd k = m.gram.jittered();
  const double log_det_k = m.gram.log_det();
  const double constant = nll_constant(theta.kind);

  auto sample = [&](const Eigen::VectorXd& a) {
    Sample s;
    const Eigen::VectorXd ka = k * a;
    s.f = ka.array() + mean;
    s.dt = data_term(s.f, obs, theta);
    s.psi = -s.dt.log_lik + 0.5 * a.dot(ka);
    if (!std::isfinite(s.psi)) s.psi = std::numeric_limits<double>::infinity();
    return s;
  };
  auto to_l = [&](double psi) { return psi / big_n + log_det_k / (2.0 * big_n) + constant; };

  Eigen::VectorXd a = Eigen::VectorXd::Zero(len);
  Sample cur = sample(a);
  if (opts.initial_f && opts.initial_f->size() == len) {
    Eigen::VectorXd a0 = m.gram.solve(Eigen::VectorXd(opts.initial_f->array() - mean));
    Sample warm = sample(a0);
    if (warm.psi < cur.psi) {
      a = std::move(a0);
      cur = std::move(warm);
    }
  }
  if (!std::isfinite(cur.psi)) throw NumericError("negative log posterior is not finite at the start");
  if (opts.record_trace) m.trace.push_back(to_l(cur.psi));

  double gnorm = (a - cur.dt.grad).lpNorm<Eigen::Infinity>() / big_n;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (gnorm <= opts.grad_tol) break;

    const Eigen::VectorXd w = cur.dt.w_diag.cwiseMax(0.0);
    const Eigen::VectorXd s = w.cwiseSqrt();
    const Eigen::VectorXd b = (w.array() * (cur.f.array() - mean)).matrix() + cur.dt.grad;
    Eigen::MatrixXd bmat = s.asDiagonal() * k * s.asDiagonal();
    bmat.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(bmat);
    if (llt.info() != Eigen::Success) throw NumericError("Newton system factorization failed");
    const Eigen::VectorXd v = llt.solve(s.cwiseProduct(k * b));
    const Eigen::VectorXd step = (b - s.cwiseProduct(v)) - a;

    bool accepted = false;
    double t = 1.0;
    for (int half = 0; half < 40; ++half, t *= 0.5) {
      Eigen::VectorXd trial_a = a + t * step;
      Sample trial = sample(trial_a);
      // Near the optimum psi stops resolving the decrease; a step that stays
      // within rounding and shrinks the gradient is still progress.
      const bool flat = trial.psi <= cur.psi + 1e-14 * std::abs(cur.psi) &&
                        (trial_a - trial.dt.grad).lpNorm<Eigen::Infinity>() / big_n < gnorm;
      if (trial.psi < cur.psi || flat) {
        a = std::move(trial_a);
        cur = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stalled at rounding level
    if (opts.record_trace) m.trace.push_back(to_l(cur.psi));
    gnorm = (a - cur.dt.grad).lpNorm<Eigen::Infinity>() / big_n;
  }

  m.f_hat = cur.f;
  m.alpha = a;
  m.w_diag = cur.dt.w_diag;
  m.final_grad_norm = gnorm;
  m.converged = gnorm <= opts.grad_tol;
  m.iterations = it;
  m.nll_value = to_l(cur.psi);
  factor_posterior(m);
  return m;
}

double laplace_value(const FittedModel& model) {
  const double n = static_cast<double>(model.data.size());
  return model.nll_value - 0.5 * kLog2Pi + model.log_det_posterior_precision() / (2.0 * n);
}

LaplaceEval laplace_evaluate(const HyperParams& theta, const SurvivalDataset& data,
                             const MapOptions& opts) {
  LaplaceEval out;
  try {
    FittedModel m = fit_map(data, theta, opts);
    if (!m.converged) {
      out.failure = "inner MAP did not converge";
    } else {
      const double v = laplace_value(m);
      if (std::isfinite(v)) {
        out.value = v;
        out.ok = true;
      } else {
        out.failure = "non-finite Laplace objective";
      }
    }
    out.model = std::move(m);
  } catch (const IllConditionedError& e) {
    out.failure = e.what();
  } catch (const NumericError& e) {
    out.failure = e.what();
  } catch (const DomainError& e) {
    out.failure = e.what();
  }
  if (!out.ok) out.value = kLaplaceFailure;
  return out;
}

double laplace_nll_hyp(const HyperParams& theta, const SurvivalDataset& data) {
  return laplace_evaluate(theta, data).value;
}

HyperParams make_template(ModelKind kind, const SurvivalDataset& data, bool ard) {
  HyperParams t;
  t.kind = kind;
  const Eigen::Index d = std::max<Eigen::Index>(data.dim(), 1);
  t.single.lengthscales = Eigen::VectorXd::Ones(d);
  t.multi.lengthscales = Eigen::VectorXd::Ones(ard ? d : 1);
  const std::vector<double> times = data.all_times();
  t.transform = TransformConfig::from_times(times);
  return t;
}

HyperBounds default_bounds(const SurvivalDataset& data, const HyperParams& templ) {
  HyperBounds b;
  const Eigen::VectorXd t = axis_times(data, templ);
  const double mt = t.mean();
  double st = column_std(t);
  if (!(st > 1e-12)) st = std::max(1.0, std::abs(mt));
  const Eigen::VectorXd sx = covariate_scales(data);

  b.eta = {mt - 5.0 * st, mt + 5.0 * st};
  b.beta = {1e-3 * st, 1e3 * st};
  if (is_hazard(templ.kind)) {
    b.sigma = {1e-3, 1e3};
  } else if (is_competing(templ.kind)) {
    b.sigma = {1e-3 * st, 1e3 * st};
  } else {
    b.sigma = {1e-3 * st * st, 1e3 * st * st};  // variance
  }
  b.omega = b.sigma;
  b.mu = {-5.0 * sx.mean(), 5.0 * sx.mean()};
  b.nu = {0.1, 20.0};
  const Eigen::Index nl = is_competing(templ.kind) ? templ.multi.lengthscales.size()
                                                   : templ.single.lengthscales.size();
  for (Eigen::Index k = 0; k < nl; ++k) {
    const double s = nl == sx.size() ? sx[k] : sx.mean();
    b.lengthscale.push_back({1e-2 * s, 1e2 * s});
  }
  return b;
}

HyperParams heuristic_start(const SurvivalDataset& data, const HyperParams& templ,
                            const HyperBounds& bounds) {
  HyperParams th = templ;
  const Eigen::VectorXd t = axis_times(data, templ);
  const double mt = t.mean();
  double st = column_std(t);
  if (!(st > 1e-12)) st = 1.0;
  const Eigen::Index d = data.dim();
  // half the covariate scale (the geometric centre of the length-scale range)
  auto half_scale = [&](Eigen::Index k) {
    const Range& r = bounds.lengthscale[static_cast<std::size_t>(k)];
    return 0.5 * std::sqrt(r.lo * r.hi);
  };

  if (is_hazard(th.kind)) {
    th.single.sigma = clamp_to(1.0, bounds.sigma);
    for (Eigen::Index k = 0; k < th.single.lengthscales.size(); ++k)
      th.single.lengthscales[k] = clamp_to(half_scale(k), bounds.lengthscale[static_cast<std::size_t>(k)]);
    th.nu = clamp_to(1.0, bounds.nu);
    return th;
  }
  th.eta = clamp_to(mt, bounds.eta);
  th.beta = clamp_to(0.3 * st, bounds.beta);
  if (is_competing(th.kind)) {
    th.multi.mu = 0.0;
    double vol = std::pow(std::numbers::pi, 0.5 * static_cast<double>(d));
    for (Eigen::Index k = 0; k < th.multi.lengthscales.size(); ++k) {
      th.multi.lengthscales[k] = clamp_to(half_scale(k), bounds.lengthscale[static_cast<std::size_t>(k)]);
    }
    for (Eigen::Index k = 0; k < d; ++k) vol *= th.multi.lengthscale(k);
    const double amp = std::sqrt(st * st / (2.0 * vol));
    th.multi.sigma = clamp_to(amp, bounds.sigma);
    th.multi.omega = th.omega_pinned ? 0.0 : clamp_to(amp, bounds.omega);
  } else {
    th.single.sigma = clamp_to(st * st, bounds.sigma);
    for (Eigen::Index k = 0; k < th.single.lengthscales.size(); ++k)
      th.single.lengthscales[k] = clamp_to(half_scale(k), bounds.lengthscale[static_cast<std::size_t>(k)]);
  }
  return th;
}

// ---- packing ---------------------------------------------------------------

namespace {

struct Coord {
  enum Kind { kLinear, kLog } kind;
  Range packed;
};

std::vector<Coord> coords(const HyperPacking& p) {
  std::vector<Coord> c;
  auto lin = [&](const Range& r, double center, double scale) {
    c.push_back({Coord::kLinear, {(r.lo - center) / scale, (r.hi - center) / scale}});
  };
  auto lg = [&](const Range& r) { c.push_back({Coord::kLog, {std::log(r.lo), std::log(r.hi)}}); };
  const HyperParams& t = p.templ;
  if (is_hazard(t.kind)) {
    lg(p.bounds.sigma);
    for (const auto& r : p.bounds.lengthscale) lg(r);
    lg(p.bounds.nu);
  } else if (is_competing(t.kind)) {
    lin(p.bounds.eta, p.eta_center, p.eta_scale);
    lin(p.bounds.mu, 0.0, p.mu_scale);
    lg(p.bounds.beta);
    lg(p.bounds.sigma);
    if (!t.omega_pinned) lg(p.bounds.omega);
    for (const auto& r : p.bounds.lengthscale) lg(r);
  } else {
    lin(p.bounds.eta, p.eta_center, p.eta_scale);
    lg(p.bounds.beta);
    lg(p.bounds.sigma);
    for (const auto& r : p.bounds.lengthscale) lg(r);
  }
  return c;
}

}  // namespace

HyperPacking::HyperPacking(const HyperParams& t, const HyperBounds& b) : templ(t), bounds(b) {
  eta_center = 0.5 * (b.eta.lo + b.eta.hi);
  eta_scale = std::max((b.eta.hi - b.eta.lo) / 10.0, 1e-12);
  mu_scale = std::max((b.mu.hi - b.mu.lo) / 10.0, 1e-12);
  const Eigen::Index nl = is_competing(t.kind) ? t.multi.lengthscales.size()
                                               : t.single.lengthscales.size();
  if (static_cast<Eigen::Index>(b.lengthscale.size()) != nl) {
    throw ValidationError("bounds list " + std::to_string(b.lengthscale.size()) +
                          " length scales, template has " + std::to_string(nl));
  }
}

Eigen::Index HyperPacking::size() const { return static_cast<Eigen::Index>(coords(*this).size()); }

Eigen::VectorXd HyperPacking::pack(const HyperParams& th) const {
  std::vector<double> z;
  if (is_hazard(templ.kind)) {
    z.push_back(std::log(th.single.sigma));
    for (Eigen::Index k = 0; k < th.single.lengthscales.size(); ++k) z.push_back(std::log(th.single.lengthscales[k]));
    z.push_back(std::log(th.nu));
  } else if (is_competing(templ.kind)) {
    z.push_back((th.eta - eta_center) / eta_scale);
    z.push_back(th.multi.mu / mu_scale);
    z.push_back(std::log(th.beta));
    z.push_back(std::log(th.multi.sigma));
    if (!templ.omega_pinned) z.push_back(std::log(th.multi.omega));
    for (Eigen::Index k = 0; k < th.multi.lengthscales.size(); ++k) z.push_back(std::log(th.multi.lengthscales[k]));
  } else {
    z.push_back((th.eta - eta_center) / eta_scale);
    z.push_back(std::log(th.beta));
    z.push_back(std::log(th.single.sigma));
    for (Eigen::Index k = 0; k < th.single.lengthscales.size(); ++k) z.push_back(std::log(th.single.lengthscales[k]));
  }
  return Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
}

HyperParams HyperPacking::unpack(const Eigen::VectorXd& z, double* excess) const {
  const std::vector<Coord> c = coords(*this);
  if (static_cast<std::size_t>(z.size()) != c.size()) throw ValidationError("packed vector has wrong length");
  double ex = 0.0;
  std::vector<double> v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double zi = z[static_cast<Eigen::Index>(i)];
    const double cl = std::clamp(zi, c[i].packed.lo, c[i].packed.hi);
    ex += (zi - cl) * (zi - cl);
    v[i] = c[i].kind == Coord::kLog ? std::exp(cl) : cl;
  }
  if (excess) *excess = ex;

  HyperParams th = templ;
  std::size_t i = 0;
  if (is_hazard(templ.kind)) {
    th.single.sigma = v[i++];
    for (Eigen::Index k = 0; k < th.single.lengthscales.size(); ++k) th.single.lengthscales[k] = v[i++];
    th.nu = v[i++];
  } else if (is_competing(templ.kind)) {
    th.eta = eta_center + eta_scale * v[i++];
    th.multi.mu = mu_scale * v[i++];
    th.beta = v[i++];
    th.multi.sigma = v[i++];
    th.multi.omega = templ.omega_pinned ? 0.0 : v[i++];
    for (Eigen::Index k = 0; k < th.multi.lengthscales.size(); ++k) th.multi.lengthscales[k] = v[i++];
  } else {
    th.eta = eta_center + eta_scale * v[i++];
    th.beta = v[i++];
    th.single.sigma = v[i++];
    for (Eigen::Index k = 0; k < th.single.lengthscales.size(); ++k) th.single.lengthscales[k] = v[i++];
  }
  return th;
}

// ---- outer search ------------------------------------------------------------

HyperFit fit_hyperparameters(const SurvivalDataset& data, const HyperParams& templ,
                             const HyperBounds& bounds, const HyperFitOptions& opts) {
  if (opts.restarts < 1) throw ValidationError("restarts must be at least 1");
  data.validate();
  check_compatible(data, templ.kind);
  const HyperPacking packing(templ, bounds);
  const std::vector<Coord> c = coords(packing);
  const Eigen::Index dim = packing.size();

  Philox4x32 rng(opts.seed);
  std::vector<HyperParams> starts;
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto& rg = c[static_cast<std::size_t>(i)].packed;
      z[i] = rng.uniform(rg.lo, rg.hi);
    }
    starts.push_back(packing.unpack(z));
  }
  if (opts.heuristic_first) starts[0] = heuristic_start(data, templ, bounds);
  if (opts.start) starts[0] = *opts.start;

  HyperFit fit;
  std::ostringstream failures;
  for (int r = 0; r < opts.restarts; ++r) {
    RestartRecord rec;
    rec.start = starts[static_cast<std::size_t>(r)];
    std::optional<Eigen::VectorXd> warm;
    auto objective = [&](const Eigen::VectorXd& z) {
      double excess = 0.0;
      const HyperParams th = packing.unpack(z, &excess);
      MapOptions mo = opts.map;
      if (warm) mo.initial_f = warm;
      LaplaceEval ev = laplace_evaluate(th, data, mo);
      if (ev.ok && ev.model) warm = ev.model->f_hat;
      return ev.value + excess;
    };
    const Eigen::VectorXd z0 = packing.pack(rec.start);
    const double v0 = objective(z0);
    if (v0 >= kLaplaceFailure) {
      rec.theta = rec.start;
      rec.evaluations = 1;
      failures << "restart " << r << ": start " << rec.start.describe() << " failed\n";
    } else {
      NelderMeadOptions nm;
      nm.max_evals = opts.max_evals;
      nm.x_tol = opts.x_tol;
      nm.f_tol = opts.f_tol;
      const MinimizeResult res = nelder_mead(objective, z0, nm);
      rec.theta = packing.unpack(res.x);
      rec.value = res.value;
      rec.evaluations = res.evaluations + 1;
      rec.converged = res.converged;
    }
    if (rec.value < fit.value) {
      fit.value = rec.value;
      fit.best_restart = r;
    }
    fit.restarts.push_back(std::move(rec));
  }

  if (fit.value >= kLaplaceFailure) {
    throw NotConvergedError("every hyperparameter restart failed:\n" + failures.str());
  }
  fit.theta = fit.restarts[static_cast<std::size_t>(fit.best_restart)].theta;
  LaplaceEval final_eval = laplace_evaluate(fit.theta, data);
  if (!final_eval.ok) {
    throw NotConvergedError("MAP at the selected hyperparameters failed: " + final_eval.failure);
  }
  fit.value = final_eval.value;
  fit.model = std::move(*final_eval.model);
  return fit;
}

}  // namespace gpsurv
