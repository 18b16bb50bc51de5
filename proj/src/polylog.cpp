#include "kzfcs/polylog.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kzfcs/errors.hpp"

namespace kzfcs {

namespace {

constexpr double kSeriesRadius = 0.9;

void check_order(double s) {
  if (!(s > 1.0) || std::floor(s) == s) {
    throw ValidationError("polylog order must be a non-integer real greater than 1");
  }
}

void check_disc(std::complex<double> z) {
  if (std::abs(z) > 1.0 + 1e-15) {
    std::ostringstream msg;
    msg << "polylog argument |z|=" << std::abs(z) << " lies outside the unit disc";
    throw ValidationError(msg.str());
  }
}

}  // namespace

std::complex<double> polylog_series(double s, std::complex<double> z, double tail_tolerance) {
  check_order(s);
  check_disc(z);
  const double r = std::abs(z);
  if (r == 0.0) return 0.0;
  if (r >= 1.0) throw ValidationError("defining series does not reach the tolerance on |z| = 1");

  std::complex<double> sum = 0.0;
  std::complex<double> power = 1.0;
  for (long p = 1;; ++p) {
    power *= z;
    sum += power / std::pow(static_cast<double>(p), s);
    // sum_{q > p} |z|^q / q^s <= |z|^(p+1) / ((p+1)^s (1 - |z|))
    const double tail = std::pow(r, p + 1) / (std::pow(static_cast<double>(p + 1), s) * (1.0 - r));
    if (tail < tail_tolerance) break;
  }
  return sum;
}

std::complex<double> polylog_near_one(double s, std::complex<double> z) {
  check_order(s);
  const std::complex<double> mu = std::log(z);
  if (std::abs(mu) >= 2.0 * std::numbers::pi) {
    throw ValidationError("expansion about z = 1 requires |log z| < 2 pi");
  }
  std::complex<double> sum = 0.0;
  if (std::abs(mu) > 0.0) sum = boost::math::tgamma(1.0 - s) * std::pow(-mu, s - 1.0);

  std::complex<double> term_power = 1.0;  // mu^j / j!
  int small_terms = 0;
  for (int j = 0; j < 200; ++j) {
    if (j > 0) term_power *= mu / static_cast<double>(j);
    const std::complex<double> term = boost::math::zeta(s - j) * term_power;
    sum += term;
    small_terms = std::abs(term) < 1e-17 * std::max(1.0, std::abs(sum)) ? small_terms + 1 : 0;
    if (small_terms >= 3) break;
  }
  return sum;
}

std::complex<double> polylog(double s, std::complex<double> z) {
  check_order(s);
  check_disc(z);
  if (std::abs(z) <= kSeriesRadius) return polylog_series(s, z);
  return polylog_near_one(s, z);
}

}  // namespace kzfcs
