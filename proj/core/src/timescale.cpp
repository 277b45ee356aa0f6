#include "gpsurv/timescale.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpsurv/error.hpp"

namespace gpsurv {

namespace {

void require_positive_time(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw DomainError("event time must be positive and finite, got " + std::to_string(tau));
  }
}

// log(e^x - 1) for x > 0 without overflow (large x) or cancellation (small x).
double log_expm1(double x) {
  if (x > 40.0) return x + std::log1p(-std::exp(-x));
  return std::log(std::expm1(x));
}

}  // namespace

TransformConfig TransformConfig::from_times(std::span<const double> times) {
  if (times.empty()) throw ValidationError("cannot derive a time scale from an empty dataset");
  double lo = times.front();
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("observed times must be positive");
    lo = std::min(lo, t);
  }
  return TransformConfig{kDefaultFraction * lo};
}

void TransformConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("transform gamma must be positive, got " + std::to_string(gamma));
  }
}

double to_latent(double tau, const TransformConfig& cfg) {
  require_positive_time(tau);
  return log_expm1(tau / cfg.gamma);
}

double from_latent(double t, const TransformConfig& cfg) {
  // softplus
  const double sp = t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  return cfg.gamma * sp;
}

double log_jacobian(double tau, const TransformConfig& cfg) {
  require_positive_time(tau);
  const double x = tau / cfg.gamma;
  // d/dtau log(e^x - 1) = e^x / (gamma (e^x - 1)) = 1 / (gamma (1 - e^{-x}))
  return -std::log(cfg.gamma) - std::log(-std::expm1(-x));
}

}  // namespace gpsurv
