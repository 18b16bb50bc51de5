#pragma once

// Embedded explicit Runge-Kutta integrators with adaptive step control:
// Dormand-Prince 8(5,3) (default) and Dormand-Prince 5(4).
//
// State is any random-access container of doubles with size() and a copy
// constructor (std::array<double, D> for the two-level problems,
// std::vector<double> for the spin-chain oracle). Complex amplitudes are
// stored as interleaved (re, im) pairs by the callers.
//
// Local errors of an explicit RK step are not norm-conserving, so the norm
// of a Schroedinger state drifts roughly as tolerance times elapsed time.
// The eighth-order pair propagates a solution far more accurate than its
// error estimate, which keeps that drift small on long ramps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>

#include "kzfcs/dop853_tableau.hpp"
#include "kzfcs/errors.hpp"

namespace kzfcs {

enum class RkMethod { Dop853, Dopri5 };

inline std::string to_string(RkMethod method) { return method == RkMethod::Dop853 ? "dop853" : "dopri5"; }

inline RkMethod rk_method_from_string(const std::string& name) {
  if (name == "dop853") return RkMethod::Dop853;
  if (name == "dopri5") return RkMethod::Dopri5;
  throw ValidationError("unknown integrator '" + name + "' (expected dop853 or dopri5)");
}

struct IntegratorConfig {
  RkMethod method = RkMethod::Dop853;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 1.0;  // dimensionless time
  std::size_t max_steps = 500'000'000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step > 0.0) || max_steps == 0) {
      throw ValidationError("integrator tolerances, max_step and max_steps must be positive");
    }
  }
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double smallest_step = std::numeric_limits<double>::infinity();
};

struct NoStepCap {
  double operator()(double /*t*/) const { return std::numeric_limits<double>::infinity(); }
};

struct NoObserver {
  template <class State>
  void operator()(double /*t*/, const State& /*y*/) const {}
};

namespace detail {

struct Dopri5Tableau {
  static constexpr int kStages = 6;
  static constexpr int kErrorOrder = 4;
  static constexpr std::array<double, 6> C{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0};
  static constexpr std::array<std::array<double, 6>, 6> A{{
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
  }};
  static constexpr std::array<double, 6> B{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
  // Difference of the fifth- and fourth-order weights; last entry multiplies
  // the derivative at the new point.
  static constexpr std::array<double, 7> E{71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                                           -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
};

struct Dop853Tableau {
  static constexpr int kStages = dop853::kStages;
  static constexpr int kErrorOrder = 7;
};

template <class Tableau, class State, class Rhs, class StepCap, class Observer>
IntegrationStats integrate_embedded(Rhs& rhs, State& y, double t0, double t1, const IntegratorConfig& cfg,
                                    StepCap& step_cap, Observer& observer) {
  constexpr int S = Tableau::kStages;
  constexpr bool kIs853 = std::is_same_v<Tableau, Dop853Tableau>;
  auto coef_a = [](int i, int j) {
    if constexpr (kIs853) return dop853::A[i][j];
    else return Tableau::A[i][j];
  };
  auto coef_b = [](int i) {
    if constexpr (kIs853) return dop853::B[i];
    else return Tableau::B[i];
  };
  auto coef_c = [](int i) {
    if constexpr (kIs853) return dop853::C[i];
    else return Tableau::C[i];
  };

  IntegrationStats stats;
  const std::size_t n = y.size();
  // k[0..S-1] are the stages, k[S] the derivative at the new point.
  std::array<State, S + 1> k;
  k.fill(y);
  State stage = y, y_new = y;

  auto rms = [n](auto&& term) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = term(i);
      acc += v * v;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  double t = t0;
  rhs(t, y, k[0]);
  ++stats.rhs_evaluations;

  // Initial step from the local time scale |y| / |f|.
  double h;
  {
    const double d0 = rms([&](std::size_t i) { return y[i] / (cfg.abs_tol + cfg.rel_tol * std::abs(y[i])); });
    const double d1 = rms([&](std::size_t i) { return k[0][i] / (cfg.abs_tol + cfg.rel_tol * std::abs(y[i])); });
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, cfg.max_step, step_cap(t), t1 - t0});
  }

  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0;
  constexpr double expo = -1.0 / (Tableau::kErrorOrder + 1);
  bool rejected_last = false;

  while (t < t1) {
    if (stats.accepted + stats.rejected >= cfg.max_steps) {
      std::ostringstream msg;
      msg << "integrator exceeded " << cfg.max_steps << " steps at t=" << t;
      throw NumericalError(msg.str());
    }
    h = std::min({h, cfg.max_step, step_cap(t)});
    bool last = false;
    if (t + h >= t1 || t1 - (t + h) < 1e-12 * std::abs(t1)) {
      h = t1 - t;
      last = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      std::ostringstream msg;
      msg << "integrator step underflow (h=" << h << ") at t=" << t;
      throw NumericalError(msg.str());
    }

    for (int s = 1; s < S; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < s; ++j) acc += coef_a(s, j) * k[j][i];
        stage[i] = y[i] + h * acc;
      }
      rhs(t + coef_c(s) * h, stage, k[s]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < S; ++j) acc += coef_b(j) * k[j][i];
      y_new[i] = y[i] + h * acc;
    }
    const double t_new = last ? t1 : t + h;
    rhs(t_new, y_new, k[S]);
    stats.rhs_evaluations += S;

    auto scale = [&](std::size_t i) { return cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i])); };
    double err;
    if constexpr (kIs853) {
      // Hairer's combined estimate: the fifth-order difference, damped by
      // the third-order one where the latter is large.
      double e5 = 0.0, e3 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double a5 = 0.0, a3 = 0.0;
        for (int j = 0; j <= S; ++j) {
          a5 += dop853::E5[j] * k[j][i];
          a3 += dop853::E3[j] * k[j][i];
        }
        const double sc = scale(i);
        e5 += (a5 / sc) * (a5 / sc);
        e3 += (a3 / sc) * (a3 / sc);
      }
      err = (e5 == 0.0 && e3 == 0.0) ? 0.0 : std::abs(h) * e5 / std::sqrt((e5 + 0.01 * e3) * static_cast<double>(n));
    } else {
      err = rms([&](std::size_t i) {
        double acc = 0.0;
        for (int j = 0; j <= S; ++j) acc += Tableau::E[j] * k[j][i];
        return h * acc / scale(i);
      });
    }
    if (!std::isfinite(err)) {
      std::ostringstream msg;
      msg << "integrator produced a non-finite state at t=" << t;
      throw NumericalError(msg.str());
    }

    if (err <= 1.0) {
      stats.smallest_step = std::min(stats.smallest_step, h);
      ++stats.accepted;
      t = t_new;
      std::swap(y, y_new);
      std::swap(k[0], k[S]);
      observer(t, y);
      double fac = err == 0.0 ? fac_max : std::clamp(safety * std::pow(err, expo), fac_min, fac_max);
      if (rejected_last) fac = std::min(fac, 1.0);
      h *= fac;
      rejected_last = false;
    } else {
      ++stats.rejected;
      h *= std::max(fac_min, safety * std::pow(err, expo));
      rejected_last = true;
    }
  }
  return stats;
}

}  // namespace detail

// Integrates dy/dt = rhs(t, y, dydt) from t0 to t1 in place. `step_cap(t)`
// bounds the step size at time t on top of the error control;
// `observer(t, y)` is called after every accepted step.
template <class State, class Rhs, class StepCap = NoStepCap, class Observer = NoObserver>
IntegrationStats integrate_rk(Rhs&& rhs, State& y, double t0, double t1, const IntegratorConfig& cfg,
                              StepCap&& step_cap = {}, Observer&& observer = {}) {
  cfg.validate();
  if (!(t1 > t0)) return {};
  if (cfg.method == RkMethod::Dop853) {
    return detail::integrate_embedded<detail::Dop853Tableau>(rhs, y, t0, t1, cfg, step_cap, observer);
  }
  return detail::integrate_embedded<detail::Dopri5Tableau>(rhs, y, t0, t1, cfg, step_cap, observer);
}

}  // namespace kzfcs
