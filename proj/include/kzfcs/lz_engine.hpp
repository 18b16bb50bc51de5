#pragma once

// Per-mode Landau-Zener dynamics: prepare the instantaneous ground state at
// g_start, integrate the Schroedinger equation along the schedule and project
// onto the excited eigenstate at g_end.

#include <complex>
#include <string>
#include <vector>

#include "kzfcs/integrator.hpp"
#include "kzfcs/modes.hpp"

namespace kzfcs {

enum class Method { ClosedForm, Unitary, Dephased };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct PureState2 {
  std::complex<double> c0;
  std::complex<double> c1;

  double norm_squared() const { return std::norm(c0) + std::norm(c1); }
};

struct ModeResult {
  double k = 0.0;
  double p = 0.0;  // excitation probability p_k
  Method method = Method::Unitary;
  double norm_drift = 0.0;  // | |psi|^2 - 1 | (Unitary) or |tr rho - 1| (Dephased)
};

// Durations below this are treated as an instantaneous quench.
inline constexpr double kSuddenDuration = 1e-8;

// Instantaneous eigenvectors of H_k(g) in the cos/sin(theta/2) form.
PureState2 ground_state(double k, double g);
PureState2 excited_state(double k, double g);

PureState2 prepare_ground(double k, const QuenchSchedule& schedule);

// Excitation probability of an instantaneous quench from g_start to g_end:
// sin^2((theta_end - theta_start) / 2).
double sudden_excitation(double k, double g_start, double g_end);

// Largest step the integrator may take at field g: resolves the rotation of
// the instantaneous eigenbasis, which peaks at the avoided crossing.
double crossing_step_cap(double k, double g, double dg_dt, double scale);

ModeResult evolve_mode(double k, const QuenchSchedule& schedule, const IntegratorConfig& cfg);

// Same as evolve_mode, also returning the final state.
ModeResult evolve_mode(double k, const QuenchSchedule& schedule, const IntegratorConfig& cfg, PureState2& final_state);

// One result per positive grid momentum, ascending in k. Modes are evaluated
// concurrently on up to `threads` workers (0 = hardware concurrency); the
// result does not depend on the thread count.
std::vector<ModeResult> excitation_spectrum(const ChainSpec& spec, const QuenchSchedule& schedule,
                                            const IntegratorConfig& cfg, unsigned threads = 0);

// Landau-Zener closed form for every grid mode, tagged ClosedForm.
std::vector<ModeResult> closed_form_spectrum(const ChainSpec& spec, double quench);

}  // namespace kzfcs
