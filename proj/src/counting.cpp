#include "kzfcs/counting.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "kzfcs/errors.hpp"
#include "kzfcs/polylog.hpp"

namespace kzfcs {

namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

constexpr double kClampFloor = -1e-14;

// Clamps round-off negativity to zero and renormalizes. Anything more
// negative than kClampFloor indicates a logic error.
void clean_pmf(std::vector<double>& pmf) {
  CompensatedSum total;
  for (std::size_t n = 0; n < pmf.size(); ++n) {
    if (pmf[n] < 0.0) {
      if (pmf[n] < kClampFloor) {
        std::ostringstream msg;
        msg << "PMF entry P(" << n << ")=" << pmf[n] << " is negative beyond round-off";
        throw NumericalError(msg.str());
      }
      pmf[n] = 0.0;
    }
    total.add(pmf[n]);
  }
  const double norm = total.value();
  for (double& v : pmf) v /= norm;
}

void check_quench(double quench) {
  if (!(quench > 0.0)) throw ValidationError("quench parameter A must be positive");
}

void check_order(int q) {
  if (q < 1 || q > 3) throw ValidationError("cumulant order must be 1, 2 or 3");
}

}  // namespace

void ExcitationSpectrum::validate() const {
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "excitation probability p[" << i << "]=" << p << " outside [0, 1]";
      throw ValidationError(msg.str());
    }
  }
}

ExcitationSpectrum ExcitationSpectrum::from_modes(const std::vector<ModeResult>& modes) {
  ExcitationSpectrum spectrum;
  spectrum.probabilities.reserve(modes.size());
  for (const auto& m : modes) spectrum.probabilities.push_back(m.p);
  return spectrum;
}

double Cumulants::operator[](int q) const {
  switch (q) {
    case 1:
      return kappa1;
    case 2:
      return kappa2;
    case 3:
      return kappa3;
    default:
      throw ValidationError("cumulant order must be 1, 2 or 3");
  }
}

Cumulants KinkDistribution::moments() const {
  CompensatedSum mean;
  for (std::size_t n = 0; n < pmf.size(); ++n) mean.add(static_cast<double>(n) * pmf[n]);
  const double mu = mean.value();
  CompensatedSum m2, m3;
  for (std::size_t n = 0; n < pmf.size(); ++n) {
    const double d = static_cast<double>(n) - mu;
    m2.add(d * d * pmf[n]);
    m3.add(d * d * d * pmf[n]);
  }
  return {mu, m2.value(), m3.value()};
}

double KinkDistribution::skewness() const { return kappa3 / std::pow(kappa2, 1.5); }

double lz_probability(double k, double quench) {
  check_quench(quench);
  const double w = std::numbers::pi - k;
  return std::exp(-2.0 * std::numbers::pi * quench * w * w);
}

KinkDistribution pmf_from_spectrum(const ExcitationSpectrum& spectrum) {
  spectrum.validate();
  const auto& probs = spectrum.probabilities;
  std::vector<double> pmf(probs.size() + 1, 0.0);
  pmf[0] = 1.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double p = probs[j];
    const double q = 1.0 - p;
    for (std::size_t n = j + 1; n > 0; --n) pmf[n] = pmf[n] * q + pmf[n - 1] * p;
    pmf[0] *= q;
  }
  clean_pmf(pmf);
  const Cumulants c = cumulants_from_spectrum(spectrum);
  return {std::move(pmf), c.kappa1, c.kappa2, c.kappa3};
}

std::complex<double> characteristic_function(const ExcitationSpectrum& spectrum, double theta) {
  const std::complex<double> shift = std::polar(1.0, theta) - 1.0;
  std::complex<double> product = 1.0;
  for (double p : spectrum.probabilities) product *= 1.0 + shift * p;
  return product;
}

std::complex<double> log_characteristic_function(const ExcitationSpectrum& spectrum, double theta) {
  const std::complex<double> shift = std::polar(1.0, theta) - 1.0;
  std::complex<double> total = 0.0;
  for (double p : spectrum.probabilities) total += std::log(1.0 + shift * p);
  return total;
}

KinkDistribution pmf_via_characteristic(const ExcitationSpectrum& spectrum) {
  spectrum.validate();
  const std::size_t points = spectrum.probabilities.size() + 1;
  std::vector<std::complex<double>> transform(points);
  for (std::size_t j = 0; j < points; ++j) {
    transform[j] = characteristic_function(spectrum, 2.0 * std::numbers::pi * j / points);
  }
  std::vector<double> pmf(points, 0.0);
  for (std::size_t n = 0; n < points; ++n) {
    CompensatedSum acc;
    for (std::size_t j = 0; j < points; ++j) {
      // e^{-i n theta_j}; reduce n*j mod M so the phase stays accurate.
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((n * j) % points) / points;
      acc.add((transform[j] * std::polar(1.0, phase)).real());
    }
    pmf[n] = acc.value() / static_cast<double>(points);
  }
  clean_pmf(pmf);
  const Cumulants c = cumulants_from_spectrum(spectrum);
  return {std::move(pmf), c.kappa1, c.kappa2, c.kappa3};
}

Cumulants cumulants_from_spectrum(const ExcitationSpectrum& spectrum) {
  spectrum.validate();
  CompensatedSum k1, k2, k3;
  for (double p : spectrum.probabilities) {
    const double var = p * (1.0 - p);
    k1.add(p);
    k2.add(var);
    k3.add(var * (1.0 - 2.0 * p));
  }
  return {k1.value(), k2.value(), k3.value()};
}

double kzm_mean(int n, double quench) {
  check_quench(quench);
  return static_cast<double>(n) / (4.0 * std::numbers::pi) / std::sqrt(2.0 * quench);
}

double exact_cumulant(int q, int n, double quench) {
  check_order(q);
  const double mean = kzm_mean(n, quench);
  const double pi3a = std::pow(std::numbers::pi, 3) * quench;
  const double e1 = std::erf(std::sqrt(2.0 * pi3a));
  const double e2 = std::erf(std::sqrt(4.0 * pi3a));
  switch (q) {
    case 1:
      return e1 * mean;
    case 2:
      return (e1 - e2 / std::numbers::sqrt2) * mean;
    default: {
      const double e3 = std::erf(std::sqrt(6.0 * pi3a));
      return (e1 - 3.0 / std::numbers::sqrt2 * e2 + 2.0 / std::numbers::sqrt3 * e3) * mean;
    }
  }
}

double scaling_constant(int q) {
  check_order(q);
  switch (q) {
    case 1:
      return 1.0;
    case 2:
      return 1.0 - 1.0 / std::numbers::sqrt2;
    default:
      return 1.0 - 3.0 / std::numbers::sqrt2 + 2.0 / std::numbers::sqrt3;
  }
}

double scaling_cumulant(int q, int n, double quench) { return scaling_constant(q) * kzm_mean(n, quench); }

double scaling_onset(int q) {
  if (q < 1) throw ValidationError("cumulant order must be at least 1");
  return 2.0 / (q * std::pow(std::numbers::pi, 3));
}

double gaussian_pmf(int n, double mean_kzm) {
  if (!(mean_kzm > 0.0)) throw ValidationError("Gaussian approximation needs a positive mean");
  const double d = static_cast<double>(n) - mean_kzm;
  const double spread = 6.0 * mean_kzm;
  return std::exp(-std::numbers::pi * std::numbers::pi * d * d / spread) / std::sqrt(spread / std::numbers::pi);
}

std::complex<double> polylog_log_characteristic(double theta, double mean_kzm) {
  const std::complex<double> z = 1.0 - std::polar(1.0, theta);
  if (std::abs(z) > 1.0 + 1e-15) {
    std::ostringstream msg;
    msg << "theta=" << theta << " is outside |theta| <= pi/3; the polylog series needs |1 - e^{i theta}| <= 1";
    throw ValidationError(msg.str());
  }
  return -mean_kzm * polylog(1.5, z);
}

std::complex<double> polylog_characteristic(double theta, double mean_kzm) {
  return std::exp(polylog_log_characteristic(theta, mean_kzm));
}

Cumulants total_kink_cumulants(const Cumulants& c) { return {2.0 * c.kappa1, 4.0 * c.kappa2, 8.0 * c.kappa3}; }

}  // namespace kzfcs
