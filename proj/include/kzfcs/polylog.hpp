#pragma once

#include <complex>

namespace kzfcs {

// Li_s(z) = sum_{p >= 1} z^p / p^s for real non-integer s > 1 on the closed
// unit disc |z| <= 1. Uses the defining series for |z| <= 0.9 and the
// expansion about z = 1,
//   Li_s(e^mu) = Gamma(1 - s) (-mu)^(s - 1) + sum_j zeta(s - j) mu^j / j!,
// on the outer annulus where the defining series converges too slowly.
// Throws ValidationError for |z| > 1 (no analytic continuation).
std::complex<double> polylog(double s, std::complex<double> z);

// Defining series only, truncated once the geometric tail bound drops below
// `tail_tolerance`. Exposed for cross-checking the two evaluation routes.
std::complex<double> polylog_series(double s, std::complex<double> z, double tail_tolerance = 1e-15);

// Expansion about z = 1 only; valid for |log z| < 2 pi.
std::complex<double> polylog_near_one(double s, std::complex<double> z);

}  // namespace kzfcs
