#pragma once

namespace gpsurv {

/// Above this argument erfc-based quantities switch to the asymptotic series
/// 1 - 1/(2h^2) + 3/(2h^2)^2 - 15/(2h^2)^3 (coefficients (2n-1)!!).
inline constexpr double kErfcAsymptoticSwitch = 20.0;

/// Branch cutoff of stable_log_diff_exp.
inline constexpr double kLogDiffCutoff = 10.0;

/// exp(-h^2) / erfc(h). Finite for every finite h; tends to 0 as h -> -inf and
/// to h * sqrt(pi) as h -> +inf.
double hazard_ratio(double h);

/// log(erfc(h) / 2), accurate in both tails.
double log_half_erfc(double h);

/// log S(t | f) for a Gaussian N(f, beta^2) event-time density: log(erfc(h) / 2)
/// with h = (t - f) / (beta sqrt 2).
double log_survival_gauss(double t, double f, double beta);

/// log(exp(-x1) - exp(-x2)) for x2 > x1. Throws DomainError otherwise.
/// x2 = +inf is allowed and yields -x1.
double stable_log_diff_exp(double x1, double x2);

/// The truncated asymptotic series 1 - 1/(2h^2) + 3/(2h^2)^2 - 15/(2h^2)^3.
double erfc_asymptotic_series(double h);

}  // namespace gpsurv
