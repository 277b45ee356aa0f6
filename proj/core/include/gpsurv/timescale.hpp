#pragma once

#include <span>

namespace gpsurv {

/// Monotone map between observed event times tau > 0 and the latent regression
/// axis t = log(exp(tau / gamma) - 1).
///
/// For tau well above gamma the map is effectively linear (t ~ tau / gamma), so
/// gamma is normally chosen below the smallest observed time.
struct TransformConfig {
  double gamma = 1.0;

  /// Fraction of the smallest observed time used by `from_times`.
  static constexpr double kDefaultFraction = 0.5;

  /// gamma = kDefaultFraction * min(times). Throws ValidationError on empty or
  /// nonpositive input.
  static TransformConfig from_times(std::span<const double> times);

  void validate() const;
};

/// Latent time for a raw time. Throws DomainError for tau <= 0.
double to_latent(double tau, const TransformConfig& cfg);

/// Raw time gamma * log(1 + exp(t)); strictly positive for every finite t.
double from_latent(double t, const TransformConfig& cfg);

/// log(d to_latent / d tau). Throws DomainError for tau <= 0.
double log_jacobian(double tau, const TransformConfig& cfg);

}  // namespace gpsurv
