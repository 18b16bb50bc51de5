#pragma once

// Single-mode Landau-Zener dynamics with pure dephasing,
//   d rho/dt = -i [H_k(g(t)), rho] + gamma (L rho L - rho),
// with L = sigma_z either in the fixed qubit basis or along the
// instantaneous field direction. Internally the master equation is carried
// as a Bloch vector; DensityMatrix2 is the exchange type.

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "kzfcs/integrator.hpp"
#include "kzfcs/lz_engine.hpp"
#include "kzfcs/modes.hpp"

namespace kzfcs {

struct DensityMatrix2 {
  std::complex<double> r00{1.0, 0.0};
  std::complex<double> r01{0.0, 0.0};
  std::complex<double> r10{0.0, 0.0};
  std::complex<double> r11{0.0, 0.0};

  static DensityMatrix2 from_bloch(const std::array<double, 3>& r);
  static DensityMatrix2 from_pure(const PureState2& psi);
  std::array<double, 3> bloch() const;

  std::complex<double> trace() const { return r00 + r11; }
  double purity() const;
  double hermiticity_defect() const { return std::abs(r10 - std::conj(r01)); }
  double min_eigenvalue() const;
  // <psi| rho |psi>
  double expectation(const PureState2& psi) const;
};

enum class DephasingBasis { QubitZ, InstantaneousEnergy };

std::string to_string(DephasingBasis basis);
DephasingBasis dephasing_basis_from_string(const std::string& name);

struct DephasingConfig {
  double gamma = 0.0;  // rate in units of J / hbar
  DephasingBasis basis = DephasingBasis::QubitZ;

  void validate() const;
};

// Called after every accepted integrator step with the time and state.
using DensityObserver = std::function<void(double, const DensityMatrix2&)>;

DensityMatrix2 evolve_density(double k, const QuenchSchedule& schedule, const IntegratorConfig& cfg,
                              const DephasingConfig& noise, const DensityObserver& observer = {});

// Projects the final state onto the excited eigenstate at g_end. The
// returned method tag is Dephased.
ModeResult evolve_mode_dephased(double k, const QuenchSchedule& schedule, const IntegratorConfig& cfg,
                                const DephasingConfig& noise);

// Relaxes rho under pure dephasing with the Hamiltonian frozen at field g for
// a time `duration`.
DensityMatrix2 evolve_density_frozen(double k, double g, const DensityMatrix2& rho, double duration,
                                     const IntegratorConfig& cfg, const DephasingConfig& noise,
                                     const DensityObserver& observer = {});

std::vector<ModeResult> dephased_spectrum(const ChainSpec& spec, const QuenchSchedule& schedule,
                                          const IntegratorConfig& cfg, const DephasingConfig& noise,
                                          unsigned threads = 0);

}  // namespace kzfcs
