#include "gpsurv/likelihoods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "gpsurv/error.hpp"
#include "gpsurv/special.hpp"

namespace gpsurv {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kSqrtPi = 1.7724538509055160273;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Intervals narrower than this (in h units), and not too far out in a tail,
// go through Gauss-Legendre on the erfc integrand instead of an erfc difference.
constexpr double kNarrowWidth = 1.0;
constexpr double kNarrowSlope = 3.0;

using Legendre = boost::math::quadrature::gauss<double, 20>;

}  // namespace

Contribution gauss_event(double t, double f, double beta) {
  const double r = t - f;
  const double b2 = beta * beta;
  return {-0.5 * kLog2Pi - std::log(beta) - r * r / (2.0 * b2), r / b2, 1.0 / b2};
}

Contribution gauss_censored(double t, double f, double beta) {
  const double h = (t - f) / (beta * kSqrt2);
  Contribution c;
  c.log_p = log_half_erfc(h);
  const double g = std::numbers::sqrt2 / (kSqrtPi * beta) * hazard_ratio(h);
  c.d1 = g;
  // w = g (g - sqrt2 h / beta); in the asymptotic regime g - sqrt2 h / beta
  // cancels, so take it from the series directly.
  const double lin = kSqrt2 * h / beta;
  if (h > kErfcAsymptoticSwitch) {
    const double s = erfc_asymptotic_series(h);
    c.w = g * lin * (1.0 - s) / s;
  } else {
    c.w = g * (g - lin);
  }
  return c;
}

Contribution gauss_interval(double t_lower, double t_upper, double f, double beta) {
  if (!(t_upper > t_lower)) throw DomainError("interval upper bound must exceed lower bound");
  if (std::isinf(t_upper)) return gauss_censored(t_lower, f, beta);

  const double scale = beta * kSqrt2;
  const double hl = (t_lower - f) / scale;
  const double hu = (t_upper - f) / scale;
  const double width = hu - hl;
  const double reach = std::max(std::abs(hl), std::abs(hu));
  Contribution c;

  if (width <= kNarrowWidth && width * reach <= kNarrowSlope) {
    // psi = (1/sqrt pi) int exp(-s^2) ds; factor out exp(-m^2) with m the
    // point of the interval closest to zero.
    const double m = hl > 0.0 ? hl : (hu < 0.0 ? hu : 0.0);
    auto g = [m](double s) { return std::exp(-(s - m) * (s + m)); };
    const double i0 = Legendre::integrate(g, hl, hu);
    const double i1 = Legendre::integrate([&](double s) { return 2.0 * s * g(s); }, hl, hu);
    const double i2 =
        Legendre::integrate([&](double s) { return (4.0 * s * s - 2.0) * g(s); }, hl, hu);
    c.log_p = -m * m + std::log(i0 / kSqrtPi);
    c.d1 = i1 / (scale * i0);
    c.w = c.d1 * c.d1 - i2 / (2.0 * beta * beta * i0);
    return c;
  }

  if (hl >= 0.0) {
    c.log_p = stable_log_diff_exp(-log_half_erfc(hl), -log_half_erfc(hu));
  } else if (hu <= 0.0) {
    // mirror: psi = Phi-side difference, computed from the left tail
    c.log_p = stable_log_diff_exp(-log_half_erfc(-hu), -log_half_erfc(-hl));
  } else {
    c.log_p = std::log1p(-0.5 * (std::erfc(hu) + std::erfc(-hl)));
  }
  // phi(h) / psi with phi(h) = exp(-h^2) / sqrt(pi)
  const double pl = std::exp(-hl * hl - c.log_p) / kSqrtPi;
  const double pu = std::exp(-hu * hu - c.log_p) / kSqrtPi;
  c.d1 = (pl - pu) / scale;
  c.w = c.d1 * c.d1 - (hl * pl - hu * pu) / (beta * beta);
  return c;
}

Contribution hazard_event(double tau, double f, double nu) {
  const double log_tau = std::log(tau);
  const double x = std::exp(nu * log_tau + f);
  return {std::log(nu) + (nu - 1.0) * log_tau + f - x, 1.0 - x, x};
}

Contribution hazard_censored(double tau, double f, double nu) {
  const double x = std::exp(nu * std::log(tau) + f);
  return {-x, -x, x};
}

Contribution hazard_interval(double tau_lower, double tau_upper, double f, double nu) {
  if (!(tau_upper > tau_lower)) throw DomainError("interval upper bound must exceed lower bound");
  if (std::isinf(tau_upper)) return hazard_censored(tau_lower, f, nu);

  // With D = x2 - x1: log p = -x1 + log(1 - e^-D), and dD/df = D. D comes
  // from expm1 of the log ratio so narrow intervals keep their digits.
  const double x1 = std::exp(nu * std::log(tau_lower) + f);
  const double d = x1 * std::expm1(nu * (std::log(tau_upper) - std::log(tau_lower)));
  const double em1 = std::expm1(d);
  // phi(D) = D / (e^D - 1) and its derivative
  double phi, dphi;
  if (std::isinf(d)) {
    phi = dphi = 0.0;
  } else if (d < 1e-3) {
    phi = 1.0 - d / 2.0 + d * d / 12.0 - d * d * d * d / 720.0;
    dphi = -0.5 + d / 6.0 - d * d * d / 180.0;
  } else {
    phi = d / em1;
    dphi = (1.0 - d / -std::expm1(-d)) / em1;
  }
  Contribution c;
  c.log_p = -x1 + (d < kLogDiffCutoff ? std::log(-std::expm1(-d)) : std::log1p(-std::exp(-d)));
  c.d1 = -x1 + phi;
  c.w = x1 - d * dphi;
  return c;
}

DataTerm data_term(const Eigen::VectorXd& f, const Observations& obs, const HyperParams& theta) {
  const Eigen::Index n = obs.size();
  const Eigen::Index m = theta.latent_size(n);
  if (f.size() != m) {
    throw ValidationError("latent vector has length " + std::to_string(f.size()) + ", expected " +
                          std::to_string(m));
  }
  DataTerm dt;
  dt.grad = Eigen::VectorXd::Zero(m);
  dt.w_diag = Eigen::VectorXd::Zero(m);
  auto add = [&](Eigen::Index idx, const Contribution& c) {
    dt.log_lik += c.log_p;
    dt.grad[idx] += c.d1;
    dt.w_diag[idx] += c.w;
  };
  auto unsupported = [&](Eigen::Index i) {
    throw UnsupportedError(std::string(to_string(theta.kind)) + " cannot use the record in row " +
                           std::to_string(i));
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto kind = obs.kind[static_cast<std::size_t>(i)];
    const int risk = obs.risk[static_cast<std::size_t>(i)];
    const double lo = obs.lower[i];
    const double hi = obs.upper[i];
    switch (theta.kind) {
      case ModelKind::kGpAft:
        if (kind == RecordKind::kInterval) unsupported(i);
        if (kind == RecordKind::kExact && risk != 1) unsupported(i);
        add(i, kind == RecordKind::kExact ? gauss_event(lo, f[i], theta.beta)
                                          : gauss_censored(lo, f[i], theta.beta));
        break;
      case ModelKind::kGpAftInterval:
        if (kind == RecordKind::kExact) unsupported(i);
        add(i, kind == RecordKind::kInterval ? gauss_interval(lo, hi, f[i], theta.beta)
                                             : gauss_censored(lo, f[i], theta.beta));
        break;
      case ModelKind::kGpCompeting:
        if (kind == RecordKind::kInterval) unsupported(i);
        if (kind == RecordKind::kExact && (risk < 1 || risk > 2)) {
          throw ValidationError("competing-risks model takes risk labels 1 and 2 (row " +
                                std::to_string(i) + ")");
        }
        for (int r = 1; r <= 2; ++r) {
          const Eigen::Index idx = (r - 1) * n + i;
          add(idx, kind == RecordKind::kExact && risk == r ? gauss_event(lo, f[idx], theta.beta)
                                                           : gauss_censored(lo, f[idx], theta.beta));
        }
        break;
      case ModelKind::kGpHazard:
        if (kind == RecordKind::kInterval) unsupported(i);
        if (kind == RecordKind::kExact && risk != 1) unsupported(i);
        add(i, kind == RecordKind::kExact ? hazard_event(lo, f[i], theta.nu)
                                          : hazard_censored(lo, f[i], theta.nu));
        break;
      case ModelKind::kGpHazardInterval:
        if (kind == RecordKind::kExact) unsupported(i);
        add(i, kind == RecordKind::kInterval ? hazard_interval(lo, hi, f[i], theta.nu)
                                             : hazard_censored(lo, f[i], theta.nu));
        break;
    }
  }
  return dt;
}

double nll_constant(ModelKind kind) {
  if (is_competing(kind)) return kLog2Pi;
  if (is_hazard(kind)) return 0.5 * kLog2Pi;
  return 0.0;
}

NllReport assemble_nll(const DataTerm& dt, const Eigen::VectorXd& f, double prior_mean,
                       const GramMatrix& k, Eigen::Index num_subjects, ModelKind kind) {
  const double n = static_cast<double>(num_subjects);
  const Eigen::VectorXd r = f.array() - prior_mean;
  const Eigen::VectorXd alpha = k.solve(r);
  NllReport out;
  out.value = -dt.log_lik / n + r.dot(alpha) / (2.0 * n) + k.log_det() / (2.0 * n) +
              nll_constant(kind);
  out.grad = (alpha - dt.grad) / n;
  out.w_diag = dt.w_diag;
  return out;
}

namespace {

void check_intervals(const SurvivalDataset& data) {
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const Record& r = data.records[i];
    if (r.kind == RecordKind::kInterval && !(r.upper > r.time)) {
      throw DomainError("interval in row " + std::to_string(i) + " has lower >= upper");
    }
  }
}

NllReport evaluate(ModelKind expected, const Eigen::VectorXd& f, const SurvivalDataset& data,
                   const HyperParams& theta, const GramMatrix& k) {
  HyperParams th = theta;
  th.kind = expected;
  if (is_hazard(expected) && !(th.nu > 0.0)) throw DomainError("Weibull shape nu must be positive");
  if (accepts_intervals(expected)) check_intervals(data);
  if (k.size() != th.latent_size(data.size())) {
    throw ValidationError("Gram matrix size does not match the latent dimension");
  }
  const DataTerm dt = data_term(f, observations_for(data, th), th);
  return assemble_nll(dt, f, th.prior_mean(), k, data.size(), expected);
}

}  // namespace

NllReport nll_single(const Eigen::VectorXd& f, const SurvivalDataset& data,
                     const HyperParams& theta, const GramMatrix& k) {
  if (data.has(RecordKind::kInterval)) {
    throw UnsupportedError("right-censored likelihood cannot use interval records");
  }
  return evaluate(ModelKind::kGpAft, f, data, theta, k);
}

NllReport nll_interval(const Eigen::VectorXd& f, const SurvivalDataset& data,
                       const HyperParams& theta, const GramMatrix& k) {
  return evaluate(ModelKind::kGpAftInterval, f, data, theta, k);
}

NllReport nll_competing(const Eigen::VectorXd& f, const SurvivalDataset& data,
                        const HyperParams& theta, const GramMatrix& k) {
  return evaluate(ModelKind::kGpCompeting, f, data, theta, k);
}

NllReport nll_gp_hazard(const Eigen::VectorXd& f, const SurvivalDataset& data,
                        const HyperParams& theta, const GramMatrix& k) {
  return evaluate(ModelKind::kGpHazard, f, data, theta, k);
}

NllReport nll_gp_hazard_interval(const Eigen::VectorXd& f, const SurvivalDataset& data,
                                 const HyperParams& theta, const GramMatrix& k) {
  return evaluate(ModelKind::kGpHazardInterval, f, data, theta, k);
}

NllReport nll(const Eigen::VectorXd& f, const SurvivalDataset& data, const HyperParams& theta,
              const GramMatrix& k) {
  return evaluate(theta.kind, f, data, theta, k);
}

}  // namespace gpsurv
