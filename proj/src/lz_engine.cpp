#include "kzfcs/lz_engine.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kzfcs/counting.hpp"
#include "kzfcs/errors.hpp"
#include "kzfcs/parallel.hpp"

namespace kzfcs {

std::string to_string(Method method) {
  switch (method) {
    case Method::ClosedForm:
      return "closed_form";
    case Method::Unitary:
      return "unitary";
    case Method::Dephased:
      return "dephased";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "closed_form" || name == "ClosedForm" || name == "closed") return Method::ClosedForm;
  if (name == "unitary" || name == "Unitary") return Method::Unitary;
  if (name == "dephased" || name == "Dephased") return Method::Dephased;
  throw ValidationError("unknown method '" + name + "' (expected closed_form, unitary or dephased)");
}

PureState2 ground_state(double k, double g) {
  const double half = 0.5 * eigenstate_angle(k, g);
  return {std::cos(half), std::sin(half)};
}

PureState2 excited_state(double k, double g) {
  const double half = 0.5 * eigenstate_angle(k, g);
  return {-std::sin(half), std::cos(half)};
}

PureState2 prepare_ground(double k, const QuenchSchedule& schedule) { return ground_state(k, schedule.g_start); }

double sudden_excitation(double k, double g_start, double g_end) {
  const double s = std::sin(0.5 * (eigenstate_angle(k, g_end) - eigenstate_angle(k, g_start)));
  return s * s;
}

double crossing_step_cap(double k, double g, double dg_dt, double scale) {
  const double hz = 4.0 * scale * (g - std::cos(k));
  const double hx = 4.0 * scale * std::sin(k);
  const double rate = std::abs(hx * 4.0 * scale * dg_dt) / (hz * hz + hx * hx);
  constexpr double kMaxRotation = 0.1;  // radians of eigenbasis rotation per step
  return rate > 0.0 ? kMaxRotation / rate : std::numeric_limits<double>::infinity();
}

namespace {

double checked_probability(double p, double k, double quench) {
  if (!(p >= -1e-9 && p <= 1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "excitation probability " << p << " out of range for k=" << k << ", A=" << quench;
    throw NumericalError(msg.str());
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

ModeResult evolve_mode(double k, const QuenchSchedule& schedule, const IntegratorConfig& cfg, PureState2& final_state) {
  if (!(k > 0.0 && k < std::numbers::pi)) {
    throw ValidationError("mode momentum must lie strictly inside (0, pi)");
  }
  schedule.validate();
  cfg.validate();

  const double duration = schedule.duration(k);
  const PureState2 excited = excited_state(k, schedule.g_end);
  ModeResult result{k, 0.0, Method::Unitary, 0.0};

  if (duration < kSuddenDuration) {
    final_state = prepare_ground(k, schedule);
    result.p = sudden_excitation(k, schedule.g_start, schedule.g_end);
    return result;
  }

  const double scale = schedule.hamiltonian_scale(k);
  const double dg_dt = (schedule.g_end - schedule.g_start) / duration;
  const double hx = 4.0 * scale * std::sin(k);
  const double cos_k = std::cos(k);
  auto field = [&](double t) { return schedule.g_start + dg_dt * t; };

  // y = (Re c0, Im c0, Re c1, Im c1); i dc/dt = H c.
  auto rhs = [&](double t, const std::array<double, 4>& y, std::array<double, 4>& dy) {
    const double hz = 4.0 * scale * (field(t) - cos_k);
    const double h0r = 0.5 * (hz * y[0] + hx * y[2]);
    const double h0i = 0.5 * (hz * y[1] + hx * y[3]);
    const double h1r = 0.5 * (hx * y[0] - hz * y[2]);
    const double h1i = 0.5 * (hx * y[1] - hz * y[3]);
    dy[0] = h0i;
    dy[1] = -h0r;
    dy[2] = h1i;
    dy[3] = -h1r;
  };
  auto cap = [&](double t) { return crossing_step_cap(k, field(t), dg_dt, scale); };

  const PureState2 start = prepare_ground(k, schedule);
  std::array<double, 4> y{start.c0.real(), start.c0.imag(), start.c1.real(), start.c1.imag()};
  try {
    integrate_rk(rhs, y, 0.0, duration, cfg, cap);
  } catch (const NumericalError& e) {
    std::ostringstream msg;
    msg << e.what() << " (mode k=" << k << ", A=" << schedule.quench << ")";
    throw NumericalError(msg.str());
  }

  final_state = {{y[0], y[1]}, {y[2], y[3]}};
  result.norm_drift = std::abs(final_state.norm_squared() - 1.0);
  const std::complex<double> overlap = std::conj(excited.c0) * final_state.c0 + std::conj(excited.c1) * final_state.c1;
  result.p = checked_probability(std::norm(overlap), k, schedule.quench);
  return result;
}

ModeResult evolve_mode(double k, const QuenchSchedule& schedule, const IntegratorConfig& cfg) {
  PureState2 unused;
  return evolve_mode(k, schedule, cfg, unused);
}

std::vector<ModeResult> excitation_spectrum(const ChainSpec& spec, const QuenchSchedule& schedule,
                                            const IntegratorConfig& cfg, unsigned threads) {
  const auto grid = momentum_grid(spec);
  schedule.validate();
  cfg.validate();

  struct Outcome {
    ModeResult result;
    std::string error;
  };
  auto outcomes = parallel_map(
      grid.size(),
      [&](std::size_t i) {
        try {
          return Outcome{evolve_mode(grid[i].k, schedule, cfg), {}};
        } catch (const NumericalError& e) {
          return Outcome{{grid[i].k, 0.0, Method::Unitary, 0.0}, e.what()};
        }
      },
      threads);

  std::vector<ModeResult> spectrum;
  spectrum.reserve(outcomes.size());
  std::ostringstream failures;
  std::size_t failed = 0;
  for (const auto& o : outcomes) {
    if (!o.error.empty()) {
      ++failed;
      failures << "\n  " << o.error;
    }
    spectrum.push_back(o.result);
  }
  if (failed != 0) {
    throw NumericalError("excitation spectrum failed for " + std::to_string(failed) + " mode(s):" + failures.str());
  }
  return spectrum;
}

std::vector<ModeResult> closed_form_spectrum(const ChainSpec& spec, double quench) {
  const auto grid = momentum_grid(spec);
  if (!(quench > 0.0)) throw ValidationError("quench parameter A must be positive");
  std::vector<ModeResult> spectrum;
  spectrum.reserve(grid.size());
  for (const auto& mode : grid) {
    spectrum.push_back({mode.k, lz_probability(mode.k, quench), Method::ClosedForm, 0.0});
  }
  return spectrum;
}

}  // namespace kzfcs
