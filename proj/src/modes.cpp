#include "kzfcs/modes.hpp"

#include <cmath>
#include <numbers>

#include "kzfcs/errors.hpp"

namespace kzfcs {

void ChainSpec::validate() const {
  if (n <= 0 || n % 2 != 0) {
    throw ValidationError("chain size N must be a positive even integer, got " + std::to_string(n));
  }
  if (n < 4) {
    throw ValidationError("chain size N must be at least 4, got " + std::to_string(n));
  }
  if (!(coupling > 0.0) || !std::isfinite(coupling)) {
    throw ValidationError("coupling J must be positive and finite");
  }
}

std::vector<MomentumMode> momentum_grid(const ChainSpec& spec) {
  spec.validate();
  std::vector<MomentumMode> grid;
  grid.reserve(static_cast<std::size_t>(spec.n / 2));
  for (int m = 1; m <= spec.n / 2; ++m) {
    grid.push_back({m, std::numbers::pi * (2.0 * m - 1.0) / spec.n});
  }
  return grid;
}

double dispersion(double k, double g, const ChainSpec& spec) {
  return 2.0 * spec.coupling * std::hypot(g - std::cos(k), std::sin(k));
}

double TwoLevelHamiltonian::gap() const { return std::hypot(hz, hx); }

TwoLevelHamiltonian mode_hamiltonian(double k, double g, const ChainSpec& spec) {
  if (!(k > 0.0 && k < std::numbers::pi)) {
    throw ValidationError("mode momentum must lie strictly inside (0, pi), got " + std::to_string(k));
  }
  return {4.0 * spec.coupling * (g - std::cos(k)), 4.0 * spec.coupling * std::sin(k)};
}

double detuning_alias(double k, double g, double coupling) {
  return 4.0 * coupling * (g + std::cos(k)) / std::sin(k);
}

double eigenstate_angle(double k, double g) { return -std::atan2(std::sin(k), -(g - std::cos(k))); }

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::LinearRamp:
      return "linear";
    case ScheduleKind::RescaledChirp:
      return "chirp";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "linear" || name == "LinearRamp") return ScheduleKind::LinearRamp;
  if (name == "chirp" || name == "RescaledChirp") return ScheduleKind::RescaledChirp;
  throw ValidationError("unknown schedule '" + name + "' (expected linear or chirp)");
}

std::vector<std::string> QuenchSchedule::validate() const {
  if (!std::isfinite(g_start) || !std::isfinite(g_end)) {
    throw ValidationError("schedule fields must be finite");
  }
  if (!(quench > 0.0) || !std::isfinite(quench)) {
    throw ValidationError("quench parameter A must be positive and finite");
  }
  if (g_end < g_start) {
    throw ValidationError("schedule must ramp upward (g_end >= g_start)");
  }
  if (kind == ScheduleKind::RescaledChirp && !(rabi_time > 0.0)) {
    throw ValidationError("chirp Rabi time must be positive");
  }
  std::vector<std::string> warnings;
  if (!(g_start < -1.0)) {
    warnings.emplace_back("g_start >= -1: the ramp does not start in the paramagnetic phase");
  }
  if (!(g_end >= -1.0)) {
    warnings.emplace_back("g_end < -1: the ramp stops before the critical point");
  }
  return warnings;
}

double QuenchSchedule::field_at(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw ValidationError("schedule progress must lie in [0, 1], got " + std::to_string(s));
  }
  if (s == 1.0) return g_end;
  return g_start + s * (g_end - g_start);
}

double QuenchSchedule::duration(double k) const {
  const double linear = quench * (g_end - g_start);
  if (kind == ScheduleKind::RescaledChirp) return rabi_time * linear * std::sin(k);
  return linear;
}

double QuenchSchedule::hamiltonian_scale(double k) const {
  if (kind == ScheduleKind::RescaledChirp) return 1.0 / std::sin(k);
  return 1.0;
}

}  // namespace kzfcs
