#pragma once

// Full counting statistics of kink pairs: the Poisson-binomial distribution
// generated by independent per-mode excitations, its cumulants, and the
// closed-form Kibble-Zurek expressions (erf forms, scaling limit, Gaussian
// and polylogarithmic approximations).

#include <array>
#include <complex>
#include <vector>

#include "kzfcs/lz_engine.hpp"

namespace kzfcs {

struct ExcitationSpectrum {
  std::vector<double> probabilities;  // p_k on the positive grid

  // Every entry must lie in [0, 1]; throws ValidationError otherwise.
  void validate() const;

  static ExcitationSpectrum from_modes(const std::vector<ModeResult>& modes);
};

struct Cumulants {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;

  double operator[](int q) const;
};

struct KinkDistribution {
  std::vector<double> pmf;  // P(n), n = 0..N/2
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;

  Cumulants cumulants() const { return {kappa1, kappa2, kappa3}; }
  // Central moments of `pmf` itself (mean, variance, third central moment).
  Cumulants moments() const;
  // gamma_1 = kappa3 / kappa2^(3/2).
  double skewness() const;
};

enum class ClosedFormKind { LZFormula, ErfExact, ScalingLimit, GaussianPMF, PolylogCF };

// Landau-Zener excitation exp(-2 pi A w^2), w = pi - k the distance to the
// soft point of the adopted sign convention.
double lz_probability(double k, double quench);

// Exact Poisson-binomial PMF by sequential convolution, O(n^2).
KinkDistribution pmf_from_spectrum(const ExcitationSpectrum& spectrum);

// prod_k [1 + (e^{i theta} - 1) p_k].
std::complex<double> characteristic_function(const ExcitationSpectrum& spectrum, double theta);

// sum_k log[1 + (e^{i theta} - 1) p_k], continuous in theta from 0.
std::complex<double> log_characteristic_function(const ExcitationSpectrum& spectrum, double theta);

// PMF by inverting the characteristic function on the M = n + 1 point grid.
// Cross-check of pmf_from_spectrum.
KinkDistribution pmf_via_characteristic(const ExcitationSpectrum& spectrum);

// kappa1 = sum p, kappa2 = sum p(1-p), kappa3 = sum p(1-p)(1-2p), each in
// compensated summation.
Cumulants cumulants_from_spectrum(const ExcitationSpectrum& spectrum);

// <n>_KZM = (N / 4 pi) / sqrt(2 A).
double kzm_mean(int n, double quench);

// Continuum erf forms valid beyond the scaling limit, q in {1, 2, 3}.
double exact_cumulant(int q, int n, double quench);

// c_q <n>_KZM with c_1 = 1, c_2 = 1 - 1/sqrt 2, c_3 = 1 - 3/sqrt 2 + 2/sqrt 3.
double scaling_constant(int q);
double scaling_cumulant(int q, int n, double quench);

// A above which erf factors of kappa_q have saturated: 2 / (q pi^3).
double scaling_onset(int q);

// (6 mean / pi)^(-1/2) exp[-pi^2 (n - mean)^2 / (6 mean)].
double gaussian_pmf(int n, double mean_kzm);

// exp[-<n>_KZM Li_{3/2}(1 - e^{i theta})] for |theta| <= pi/3, where
// |1 - e^{i theta}| <= 1. Throws ValidationError outside.
std::complex<double> polylog_characteristic(double theta, double mean_kzm);
// Logarithm of the above, without exponentiating.
std::complex<double> polylog_log_characteristic(double theta, double mean_kzm);

// kappa_q^T = 2^q kappa_q for the total kink number.
Cumulants total_kink_cumulants(const Cumulants& pair_cumulants);

}  // namespace kzfcs
