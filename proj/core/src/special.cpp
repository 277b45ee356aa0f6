#include "gpsurv/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gpsurv/error.hpp"

namespace gpsurv {

double erfc_asymptotic_series(double h) {
  const double y = 1.0 / (2.0 * h * h);
  return 1.0 - y + 3.0 * y * y - 15.0 * y * y * y;
}

double hazard_ratio(double h) {
  if (h > kErfcAsymptoticSwitch) {
    return h * std::sqrt(std::numbers::pi) / erfc_asymptotic_series(h);
  }
  return std::exp(-h * h) / std::erfc(h);
}

double log_half_erfc(double h) {
  if (h > kErfcAsymptoticSwitch) {
    return -h * h - std::log(h) - std::log(2.0 * std::sqrt(std::numbers::pi)) +
           std::log(erfc_asymptotic_series(h));
  }
  if (h < 0.0) {
    // erfc(h)/2 = 1 - erfc(-h)/2; keeps relative accuracy as the value -> 0^-.
    return std::log1p(-0.5 * std::erfc(-h));
  }
  return std::log(0.5 * std::erfc(h));
}

double log_survival_gauss(double t, double f, double beta) {
  if (!(beta > 0.0)) throw DomainError("noise scale beta must be positive");
  return log_half_erfc((t - f) / (beta * std::numbers::sqrt2));
}

double stable_log_diff_exp(double x1, double x2) {
  if (!(x2 > x1)) {
    throw DomainError("stable_log_diff_exp requires x2 > x1, got x1=" + std::to_string(x1) +
                      " x2=" + std::to_string(x2));
  }
  if (std::isinf(x2)) return -x1;
  const double d = x1 - x2;  // < 0
  if (d < -kLogDiffCutoff) {
    const double e = std::exp(d);
    return -x1 - e - 0.5 * e * e;
  }
  // log(1 - e^d): expm1 near d = 0, log1p further out.
  const double tail = d > -std::numbers::ln2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d));
  return -x1 + tail;
}

}  // namespace gpsurv
