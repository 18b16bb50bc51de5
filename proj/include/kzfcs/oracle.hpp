#pragma once

// Brute-force ground truth on the full 2^N spin Hilbert space of
//   H = -J sum_m (sz_m sz_{m+1} + g sx_m),  periodic, N even, N <= 14.
// Basis index b carries bit m = 1 when spin m (0-based) is down in sigma_z.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "kzfcs/counting.hpp"
#include "kzfcs/integrator.hpp"
#include "kzfcs/modes.hpp"

namespace kzfcs {

inline constexpr int kMaxOracleSites = 14;
inline constexpr int kMaxCrossValidationSites = 12;

struct SpinState {
  int n = 0;
  std::vector<std::complex<double>> amplitudes;

  double norm_squared() const;
  // Weight outside the even sector of the spin flip Pi = prod_m sx_m.
  double odd_parity_weight() const;
  std::complex<double> overlap(const SpinState& other) const;  // <this|other>
};

SpinState basis_state(int n, std::uint32_t bits);

// Domain-wall count W(b) of every basis string on the ring.
std::vector<int> kink_table(int n);

class IsingHamiltonian {
 public:
  IsingHamiltonian(const ChainSpec& spec, double g);

  int sites() const { return n_; }
  std::size_t dimension() const { return diagonal_.size(); }
  double field() const { return g_; }

  // out = H in (complex amplitudes).
  void apply(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;
  // Real-amplitude version for real-symmetric work (ground states).
  void apply(std::span<const double> in, std::span<double> out) const;

  double expectation(const SpinState& state) const;

  // Diagonal part -J sum sz sz; the transverse part is -J g sum sx.
  const std::vector<double>& diagonal() const { return diagonal_; }
  double coupling() const { return coupling_; }

 private:
  int n_;
  double coupling_;
  double g_;
  std::vector<double> diagonal_;
};

IsingHamiltonian build_hamiltonian(const ChainSpec& spec, double g);

// Applies Pi = prod_m sx_m (flips every bit).
SpinState apply_parity(const SpinState& state);

struct GroundState {
  double energy = 0.0;
  SpinState state;
  double residual = 0.0;  // ||H psi - E psi||
};

// Lowest state of the even-parity sector by Lanczos with full
// reorthogonalization.
GroundState ground_state(const ChainSpec& spec, double g);

// Lowest eigenvalue from a dense diagonalization of the full matrix.
// Limited to N <= 10.
double ground_energy_dense(const ChainSpec& spec, double g);

// -sum_{k > 0} eps_k(g): the even-sector ground energy from the free-fermion
// solution.
double momentum_ground_energy(const ChainSpec& spec, double g);

struct ChainEvolution {
  SpinState state;
  SpinState initial;
  double max_odd_weight = 0.0;
  double max_norm_drift = 0.0;
  IntegrationStats stats;
};

// Evolves the exact ground state at g_start through the linear ramp.
ChainEvolution evolve_chain(const ChainSpec& spec, const QuenchSchedule& schedule, const IntegratorConfig& cfg);

// P(n) = sum over strings with W(b)/2 = n of |psi_b|^2, with moments attached.
KinkDistribution kink_pair_distribution(const SpinState& state);

// <gamma_k^dag gamma_k> for every positive grid momentum (ascending k),
// measured through the Jordan-Wigner fermions of the spin state and the
// Bogoliubov modes of H(g).
std::vector<double> mode_occupations(const SpinState& state, const ChainSpec& spec, double g);

// Per-mode energies <Psi_k^dag H_k(g) Psi_k>; they sum to <H(g)> on the
// even sector.
std::vector<double> mode_energies(const SpinState& state, const ChainSpec& spec, double g);

struct CrossValidationReport {
  KinkDistribution oracle;
  KinkDistribution momentum;
  double tv_distance = 0.0;
  Cumulants cumulant_deviation;       // |oracle - momentum| per cumulant
  std::vector<double> k;              // grid momenta, ascending
  std::vector<double> p_oracle;       // from the spin state
  std::vector<double> p_momentum;     // from the two-level integrations
  double max_mode_deviation = 0.0;
  double max_odd_weight = 0.0;
  double norm_drift = 0.0;
  bool passed = false;
};

inline constexpr double kCrossValidationTolerance = 1e-4;

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

CrossValidationReport cross_validate(const ChainSpec& spec, const QuenchSchedule& schedule,
                                     const IntegratorConfig& cfg, unsigned threads = 0);

}  // namespace kzfcs
