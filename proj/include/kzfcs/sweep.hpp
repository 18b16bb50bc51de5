#pragma once

// Quench-time sweeps over methods, power-law fits, and the configuration
// that drives both. The configuration is a flat JSON document; its hash
// identifies every emitted record.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "kzfcs/counting.hpp"
#include "kzfcs/integrator.hpp"
#include "kzfcs/lz_engine.hpp"
#include "kzfcs/modes.hpp"
#include "kzfcs/noise.hpp"

namespace kzfcs {

enum class OutputFormat { Csv, Json, Both };

std::string to_string(OutputFormat format);
OutputFormat output_format_from_string(const std::string& name);

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct SweepConfig {
  int n = 100;
  std::vector<double> a_values;
  ScheduleKind schedule = ScheduleKind::LinearRamp;
  double g_start = -5.0;
  double g_end = 0.0;
  double rabi_time = kExperimentRabiTime;
  std::vector<Method> methods{Method::ClosedForm};
  DephasingConfig dephasing;
  IntegratorConfig integrator;
  std::optional<FitWindow> fit_window;
  std::string out_dir = ".";
  OutputFormat format = OutputFormat::Csv;
  bool dump_pmf = false;
  unsigned threads = 0;

  // Throws ValidationError; returns schedule warnings.
  std::vector<std::string> validate() const;

  QuenchSchedule schedule_for(double quench) const;

  // [max(2, A_min), min(50, A_max)] unless configured.
  FitWindow effective_fit_window() const;
};

// n log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int n);

nlohmann::json to_json(const SweepConfig& cfg);
// Accepts the keys written by to_json plus a_min/a_max/a_points as an
// alternative to a_values, and a single "method" string.
SweepConfig sweep_config_from_json(const nlohmann::json& doc);
SweepConfig load_sweep_config(const std::string& path);

// FNV-1a over the physics-relevant part of the configuration (everything
// except output location, format and thread count), as 16 hex digits.
std::string config_hash(const SweepConfig& cfg);

struct SweepRecord {
  double a = 0.0;
  Method method = Method::ClosedForm;
  Cumulants cumulants;
  double gamma = 0.0;
  std::string config_hash;
  std::optional<std::vector<double>> pmf;
  std::string started_at;
  std::string finished_at;

  Cumulants total_cumulants() const { return total_kink_cumulants(cumulants); }
};

struct SweepFailure {
  double a = 0.0;
  Method method = Method::ClosedForm;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<SweepFailure> failures;
};

// Per-mode excitation spectrum for one A with the chosen method.
std::vector<ModeResult> compute_spectrum(const SweepConfig& cfg, double quench, Method method);

// One record per (A, method), A-major. Modes inside a record run in
// parallel; the output does not depend on the thread count.
SweepResult run_sweep(const SweepConfig& cfg);

struct PowerLawFit {
  int q = 1;
  std::optional<Method> method;
  double exponent = 0.0;
  double amplitude = 0.0;
  double stderr_exponent = 0.0;
  FitWindow window;
  int points = 0;
  std::vector<std::string> warnings;
};

// Ordinary least squares of log kappa_q on log A inside `window`. Records
// must share one method unless `method` selects one.
PowerLawFit fit_power_law(const std::vector<SweepRecord>& records, int q, FitWindow window,
                          std::optional<Method> method = std::nullopt);

}  // namespace kzfcs
