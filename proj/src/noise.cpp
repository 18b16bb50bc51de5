#include "kzfcs/noise.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "kzfcs/errors.hpp"
#include "kzfcs/parallel.hpp"

namespace kzfcs {

DensityMatrix2 DensityMatrix2::from_bloch(const std::array<double, 3>& r) {
  DensityMatrix2 rho;
  rho.r00 = 0.5 * (1.0 + r[2]);
  rho.r11 = 0.5 * (1.0 - r[2]);
  rho.r01 = {0.5 * r[0], -0.5 * r[1]};
  rho.r10 = {0.5 * r[0], 0.5 * r[1]};
  return rho;
}

DensityMatrix2 DensityMatrix2::from_pure(const PureState2& psi) {
  DensityMatrix2 rho;
  rho.r00 = psi.c0 * std::conj(psi.c0);
  rho.r01 = psi.c0 * std::conj(psi.c1);
  rho.r10 = psi.c1 * std::conj(psi.c0);
  rho.r11 = psi.c1 * std::conj(psi.c1);
  return rho;
}

std::array<double, 3> DensityMatrix2::bloch() const {
  return {2.0 * r01.real(), -2.0 * r01.imag(), (r00 - r11).real()};
}

double DensityMatrix2::purity() const {
  return (r00 * r00 + r01 * r10 + r10 * r01 + r11 * r11).real();
}

double DensityMatrix2::min_eigenvalue() const {
  const double tr = 0.5 * (r00 + r11).real();
  const double dz = 0.5 * (r00 - r11).real();
  return tr - std::sqrt(dz * dz + std::norm(r01));
}

double DensityMatrix2::expectation(const PureState2& psi) const {
  const std::complex<double> v = std::conj(psi.c0) * (r00 * psi.c0 + r01 * psi.c1) +
                                 std::conj(psi.c1) * (r10 * psi.c0 + r11 * psi.c1);
  return v.real();
}

std::string to_string(DephasingBasis basis) {
  return basis == DephasingBasis::QubitZ ? "qubit_z" : "instantaneous_energy";
}

DephasingBasis dephasing_basis_from_string(const std::string& name) {
  if (name == "qubit_z") return DephasingBasis::QubitZ;
  if (name == "instantaneous_energy") return DephasingBasis::InstantaneousEnergy;
  throw ValidationError("unknown dephasing basis '" + name + "' (expected qubit_z or instantaneous_energy)");
}

void DephasingConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("dephasing rate gamma must be nonnegative and finite");
  }
}

namespace {

// Positivity of rho is |r| <= 1; lambda_min = (1 - |r|) / 2 >= -1e-10.
constexpr double kPositivitySlack = 2e-10;

struct BlochProblem {
  double k;
  double scale;
  double g0;
  double dg_dt;
  double gamma;
  DephasingBasis basis;

  void operator()(double t, const std::array<double, 3>& r, std::array<double, 3>& dr) const {
    const double hz = 4.0 * scale * (g0 + dg_dt * t - std::cos(k));
    const double hx = 4.0 * scale * std::sin(k);
    // Precession about h = (hx, 0, hz).
    dr[0] = -hz * r[1];
    dr[1] = hz * r[0] - hx * r[2];
    dr[2] = hx * r[1];
    if (gamma == 0.0) return;
    if (basis == DephasingBasis::QubitZ) {
      dr[0] -= 2.0 * gamma * r[0];
      dr[1] -= 2.0 * gamma * r[1];
    } else {
      const double norm = std::hypot(hx, hz);
      const double nx = hx / norm, nz = hz / norm;
      const double along = nx * r[0] + nz * r[2];
      dr[0] -= 2.0 * gamma * (r[0] - along * nx);
      dr[1] -= 2.0 * gamma * r[1];
      dr[2] -= 2.0 * gamma * (r[2] - along * nz);
    }
  }
};

void check_positivity(const std::array<double, 3>& r, double t, double k) {
  const double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  if (len > 1.0 + kPositivitySlack) {
    std::ostringstream msg;
    msg << "density matrix lost positivity (|r|-1=" << len - 1.0 << ") at t=" << t << " for k=" << k;
    throw NumericalError(msg.str());
  }
}

std::array<double, 3> run(const BlochProblem& problem, std::array<double, 3> r, double duration,
                          const IntegratorConfig& cfg, const DensityObserver& observer) {
  auto cap = [&](double t) {
    if (problem.dg_dt == 0.0) return std::numeric_limits<double>::infinity();
    return crossing_step_cap(problem.k, problem.g0 + problem.dg_dt * t, problem.dg_dt, problem.scale);
  };
  auto watch = [&](double t, const std::array<double, 3>& y) {
    check_positivity(y, t, problem.k);
    if (observer) observer(t, DensityMatrix2::from_bloch(y));
  };
  integrate_rk(problem, r, 0.0, duration, cfg, cap, watch);
  return r;
}

}  // namespace

DensityMatrix2 evolve_density(double k, const QuenchSchedule& schedule, const IntegratorConfig& cfg,
                              const DephasingConfig& noise, const DensityObserver& observer) {
  if (!(k > 0.0 && k < std::numbers::pi)) {
    throw ValidationError("mode momentum must lie strictly inside (0, pi)");
  }
  schedule.validate();
  cfg.validate();
  noise.validate();

  const auto start = DensityMatrix2::from_pure(prepare_ground(k, schedule)).bloch();
  const double duration = schedule.duration(k);
  if (duration < kSuddenDuration) return DensityMatrix2::from_bloch(start);

  const BlochProblem problem{k,           schedule.hamiltonian_scale(k), schedule.g_start,
                             (schedule.g_end - schedule.g_start) / duration, noise.gamma, noise.basis};
  try {
    return DensityMatrix2::from_bloch(run(problem, start, duration, cfg, observer));
  } catch (const NumericalError& e) {
    std::ostringstream msg;
    msg << e.what() << " (dephased mode k=" << k << ", A=" << schedule.quench << ", gamma=" << noise.gamma << ")";
    throw NumericalError(msg.str());
  }
}

ModeResult evolve_mode_dephased(double k, const QuenchSchedule& schedule, const IntegratorConfig& cfg,
                                const DephasingConfig& noise) {
  const DensityMatrix2 rho = evolve_density(k, schedule, cfg, noise);
  ModeResult result{k, 0.0, Method::Dephased, std::abs(rho.trace().real() - 1.0)};
  const double p = rho.expectation(excited_state(k, schedule.g_end));
  if (!(p >= -1e-9 && p <= 1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "dephased excitation probability " << p << " out of range for k=" << k;
    throw NumericalError(msg.str());
  }
  result.p = std::clamp(p, 0.0, 1.0);
  return result;
}

DensityMatrix2 evolve_density_frozen(double k, double g, const DensityMatrix2& rho, double duration,
                                     const IntegratorConfig& cfg, const DephasingConfig& noise,
                                     const DensityObserver& observer) {
  noise.validate();
  const BlochProblem problem{k, 1.0, g, 0.0, noise.gamma, noise.basis};
  return DensityMatrix2::from_bloch(run(problem, rho.bloch(), duration, cfg, observer));
}

std::vector<ModeResult> dephased_spectrum(const ChainSpec& spec, const QuenchSchedule& schedule,
                                          const IntegratorConfig& cfg, const DephasingConfig& noise,
                                          unsigned threads) {
  const auto grid = momentum_grid(spec);
  schedule.validate();
  noise.validate();
  return parallel_map(
      grid.size(), [&](std::size_t i) { return evolve_mode_dephased(grid[i].k, schedule, cfg, noise); }, threads);
}

}  // namespace kzfcs
