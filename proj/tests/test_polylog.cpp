#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "kzfcs/errors.hpp"
#include "kzfcs/polylog.hpp"

using namespace kzfcs;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

constexpr double kZeta32 = 2.612375348685488343348567567924;

// Plain partial sum, long enough that the tail is negligible for |z| <= 1/2.
cd brute_series(double s, cd z) {
  cd sum = 0.0, power = 1.0;
  for (int p = 1; p <= 200; ++p) {
    power *= z;
    sum += power / std::pow(p, s);
  }
  return sum;
}

}  // namespace

TEST_CASE("special values") {
  CHECK(polylog(1.5, 0.0) == cd(0.0));
  CHECK(std::abs(polylog(1.5, 1.0) - kZeta32) < 1e-14);
  // Li_s(-1) = -(1 - 2^(1-s)) zeta(s).
  CHECK(std::abs(polylog(1.5, -1.0) + (1 - std::pow(2.0, -0.5)) * kZeta32) < 1e-14);
  for (cd z : {cd(0.3, 0.1), cd(-0.45, 0.0), cd(0.0, 0.5)}) CHECK(std::abs(polylog(1.5, z) - brute_series(1.5, z)) < 1e-15);
}

TEST_CASE("series and expansion about one agree on the overlap") {
  double worst = 0.0;
  for (double r : {0.55, 0.7, 0.85, 0.9, 0.95}) {
    for (int j = 0; j < 24; ++j) {
      const cd z = std::polar(r, 2 * pi * j / 24 + 0.01);
      if (std::abs(std::log(z)) >= 2 * pi) continue;
      worst = std::max(worst, std::abs(polylog_series(1.5, z) - polylog_near_one(1.5, z)));
    }
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("unit circle through the expansion") {
  // Real part of Li_s(e^{i phi}) is the Clausen-type cosine series; its
  // even combination Li_s(e^{i phi}) + Li_s(e^{-i phi}) is real.
  for (double phi : {0.1, 1.0, pi / 3, 2.5}) {
    const cd a = polylog(1.5, std::polar(1.0, phi));
    const cd b = polylog(1.5, std::polar(1.0, -phi));
    CHECK(std::abs((a + b).imag()) < 1e-13);
    CHECK(std::abs(a - std::conj(b)) < 1e-13);
  }
  // Duplication: Li_s(z) + Li_s(-z) = 2^(1-s) Li_s(z^2).
  for (cd z : {cd(0.99, 0.0), std::polar(1.0, 0.7), std::polar(0.97, 2.0)}) {
    const cd lhs = polylog(1.5, z) + polylog(1.5, -z);
    CHECK(std::abs(lhs - std::pow(2.0, -0.5) * polylog(1.5, z * z)) < 1e-13);
  }
}

TEST_CASE("domain") {
  CHECK_THROWS_AS(polylog(1.5, 1.01), ValidationError);
  CHECK_THROWS_AS(polylog(2.0, 0.5), ValidationError);
  CHECK_THROWS_AS(polylog(0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(polylog_series(1.5, 1.0), ValidationError);
}
