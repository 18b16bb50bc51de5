#pragma once

// Momentum-space vocabulary of the periodic transverse-field Ising ring:
// grid, dispersion, per-mode two-level Hamiltonians, eigenstate angles and
// quench schedules.
//
// Units: hbar = J = 1 inside every dynamical computation. Time is measured
// in hbar/J and the ramp speed is set by the single knob A = J tau_Q / hbar.
//
// Sign convention: the mode Hamiltonian is
//   H_k(g) = 2J (g - cos k) sigma_z + 2J sin k sigma_x,
// so for a ramp from the paramagnet (g < -1) to g = 0 the soft modes sit
// near k = pi. The alternative detuning g + cos k is the same physics under
// k -> pi - k; see `detuning_alias`.

#include <string>
#include <vector>

namespace kzfcs {

struct ChainSpec {
  int n = 100;           // number of spins, even, >= 4
  double coupling = 1.0; // J

  // Throws ValidationError on odd N, N < 4 or J <= 0.
  void validate() const;
};

struct MomentumMode {
  int index = 0;  // m = 1..N/2
  double k = 0.0; // (pi / N)(2m - 1)
};

// Positive half of the antiperiodic grid, ascending in k.
std::vector<MomentumMode> momentum_grid(const ChainSpec& spec);

// Quasiparticle energy eps_k(g) = 2J sqrt((g - cos k)^2 + sin^2 k).
double dispersion(double k, double g, const ChainSpec& spec);

// H = (hbar/2)(hz sigma_z + hx sigma_x), coefficients in angular-frequency
// units. Eigenvalues are +-gap()/2.
struct TwoLevelHamiltonian {
  double hz = 0.0;
  double hx = 0.0;

  double gap() const;
  double lower_eigenvalue() const { return -0.5 * gap(); }
  double upper_eigenvalue() const { return 0.5 * gap(); }
};

// hz = 4J(g - cos k), hx = 4J sin k, so the spectrum is +-eps_k(g).
// Rejects k outside the open interval (0, pi).
TwoLevelHamiltonian mode_hamiltonian(double k, double g, const ChainSpec& spec);

// Detuning of the main-text parametrization, 4J(g + cos k)/sin k. Equal to
// the adopted convention's rescaled detuning evaluated at pi - k.
double detuning_alias(double k, double g, double coupling = 1.0);

// Bloch polar angle of the instantaneous ground state,
//   theta(k, g) = -atan2(sin k, -(g - cos k)),
// pinned by theta(k, -5) = -arctan(sin k / (5 + cos k)) and theta(k, 0) = -k.
// Ground state: cos(theta/2)|0> + sin(theta/2)|1>;
// excited state: -sin(theta/2)|0> + cos(theta/2)|1>.
double eigenstate_angle(double k, double g);

enum class ScheduleKind { LinearRamp, RescaledChirp };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

// Rabi time 1/Omega_R in units of hbar/J for Omega_R = 4J/hbar. Using it as
// the chirp normalization reproduces the experiment's pulse length verbatim.
inline constexpr double kExperimentRabiTime = 0.25;
// Normalization under which the rescaled chirp is exactly the linear ramp.
inline constexpr double kExactRescaling = 1.0;

struct QuenchSchedule {
  ScheduleKind kind = ScheduleKind::LinearRamp;
  double g_start = -5.0;
  double g_end = 0.0;
  double quench = 1.0; // A = J tau_Q / hbar
  // RescaledChirp only: T_p = rabi_time * A * (g_end - g_start) * sin k.
  double rabi_time = kExperimentRabiTime;

  // Throws on A <= 0, non-finite fields or g_end < g_start. Returns
  // warnings for ramps that do not cross the critical point g = -1.
  std::vector<std::string> validate() const;

  // g at fractional progress s in [0, 1].
  double field_at(double s) const;

  // Length of the evolution in the schedule's own time variable for mode k.
  double duration(double k) const;

  // Multiplier applied to H_k in the schedule's time variable (1 for the
  // linear ramp, 1/sin k for the rescaled chirp).
  double hamiltonian_scale(double k) const;
};

}  // namespace kzfcs
