// kzfcs: command-line front end for kink counting statistics of the
// quenched transverse-field Ising chain.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kzfcs/counting.hpp"
#include "kzfcs/emit.hpp"
#include "kzfcs/errors.hpp"
#include "kzfcs/oracle.hpp"
#include "kzfcs/sweep.hpp"

namespace fs = std::filesystem;
using namespace kzfcs;

namespace {

// Flags shared by every subcommand. Unset flags leave the config file (or
// the built-in default) untouched.
struct Overrides {
  std::optional<std::string> config;
  std::optional<int> n;
  std::vector<double> a;
  std::optional<double> a_min, a_max;
  std::optional<int> a_points;
  std::vector<std::string> methods;
  std::optional<double> gamma;
  std::optional<std::string> basis;
  std::optional<std::string> schedule;
  std::optional<double> g_start, g_end, rabi_time;
  std::optional<std::string> integrator;
  std::optional<double> rel_tol, abs_tol, max_step;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::vector<double> fit_window;
  std::optional<unsigned> threads;
  bool dump_pmf = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "flat JSON config file; flags override it");
  cmd->add_option("--n", o.n, "chain length N (even, >= 4)");
  cmd->add_option("--a", o.a, "dimensionless quench time A (repeatable)");
  cmd->add_option("--a-min", o.a_min, "log-spaced A grid: lower end");
  cmd->add_option("--a-max", o.a_max, "log-spaced A grid: upper end");
  cmd->add_option("--a-points", o.a_points, "log-spaced A grid: number of points");
  cmd->add_option("--method", o.methods, "closed_form, unitary or dephased (repeatable)");
  cmd->add_option("--gamma", o.gamma, "dephasing rate in units of J/hbar");
  cmd->add_option("--basis", o.basis, "dephasing basis: qubit_z or instantaneous_energy");
  cmd->add_option("--schedule", o.schedule, "linear or chirp");
  cmd->add_option("--g-start", o.g_start, "initial transverse field");
  cmd->add_option("--g-end", o.g_end, "final transverse field");
  cmd->add_option("--rabi-time", o.rabi_time, "chirp duration factor (0.25 experiment, 1 exact rescaling)");
  cmd->add_option("--integrator", o.integrator, "dop853 or dopri5");
  cmd->add_option("--rel-tol", o.rel_tol, "integrator relative tolerance");
  cmd->add_option("--abs-tol", o.abs_tol, "integrator absolute tolerance");
  cmd->add_option("--max-step", o.max_step, "integrator step ceiling");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--format", o.format, "csv, json or both");
  cmd->add_option("--fit-window", o.fit_window, "fit window: lo hi")->expected(2);
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_flag("--dump-pmf", o.dump_pmf, "also write the full PMF of every record");
}

SweepConfig resolve(const Overrides& o) {
  SweepConfig cfg = o.config ? load_sweep_config(*o.config) : SweepConfig{};
  if (o.n) cfg.n = *o.n;
  if (!o.a.empty()) {
    cfg.a_values = o.a;
  } else if (o.a_min || o.a_max || o.a_points) {
    // Missing ends of the range come from the config file's grid.
    const bool have = !cfg.a_values.empty();
    if ((!o.a_min || !o.a_max) && !have) throw ValidationError("--a-min and --a-max must be given together");
    const double lo = o.a_min.value_or(have ? cfg.a_values.front() : 0.0);
    const double hi = o.a_max.value_or(have ? cfg.a_values.back() : 0.0);
    const int points = o.a_points.value_or(have && cfg.a_values.size() > 1 ? static_cast<int>(cfg.a_values.size()) : 20);
    cfg.a_values = log_spaced(lo, hi, points);
  }
  if (!o.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : o.methods) cfg.methods.push_back(method_from_string(m));
  }
  if (o.gamma) cfg.dephasing.gamma = *o.gamma;
  if (o.basis) cfg.dephasing.basis = dephasing_basis_from_string(*o.basis);
  if (o.schedule) cfg.schedule = schedule_kind_from_string(*o.schedule);
  if (o.g_start) cfg.g_start = *o.g_start;
  if (o.g_end) cfg.g_end = *o.g_end;
  if (o.rabi_time) cfg.rabi_time = *o.rabi_time;
  if (o.integrator) cfg.integrator.method = rk_method_from_string(*o.integrator);
  if (o.rel_tol) cfg.integrator.rel_tol = *o.rel_tol;
  if (o.abs_tol) cfg.integrator.abs_tol = *o.abs_tol;
  if (o.max_step) cfg.integrator.max_step = *o.max_step;
  if (o.out) cfg.out_dir = *o.out;
  if (o.format) cfg.format = output_format_from_string(*o.format);
  if (o.fit_window.size() == 2) cfg.fit_window = FitWindow{o.fit_window[0], o.fit_window[1]};
  if (o.threads) cfg.threads = *o.threads;
  if (o.dump_pmf) cfg.dump_pmf = true;
  for (const auto& w : cfg.validate()) std::cerr << "warning: " << w << '\n';
  return cfg;
}

double single_a(const SweepConfig& cfg) {
  if (cfg.a_values.size() != 1) throw ValidationError("this command takes exactly one A (--a)");
  return cfg.a_values.front();
}

Method single_method(const SweepConfig& cfg) {
  if (cfg.methods.size() != 1) throw ValidationError("this command takes exactly one --method");
  return cfg.methods.front();
}

// Writes to <out>/<name> when --out was given, else to stdout.
template <class Fn>
void write_output(const std::optional<std::string>& out_flag, const SweepConfig& cfg, const std::string& name,
                  Fn&& body) {
  if (!out_flag && cfg.out_dir == ".") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  const fs::path path = fs::path(cfg.out_dir) / name;
  std::ofstream file(path);
  if (!file) throw IoError("cannot write '" + path.string() + "'");
  body(file);
  file.flush();
  if (!file) throw IoError("write to '" + path.string() + "' failed");
  std::cerr << "wrote " << path.string() << '\n';
}

int run_pk(const Overrides& o) {
  const SweepConfig cfg = resolve(o);
  const double a = single_a(cfg);
  const Method method = single_method(cfg);
  const auto modes = compute_spectrum(cfg, a, method);
  write_output(o.out, cfg, "pk_A" + format_double(a) + "_" + to_string(method) + ".csv", [&](std::ostream& out) {
    out << "k,p,method,norm_drift\n";
    for (const auto& m : modes) {
      out << format_double(m.k) << ',' << format_double(m.p) << ',' << to_string(m.method) << ','
          << format_double(m.norm_drift) << '\n';
    }
  });
  return 0;
}

int run_dist(const Overrides& o) {
  const SweepConfig cfg = resolve(o);
  const double a = single_a(cfg);
  const Method method = single_method(cfg);
  const auto dist = pmf_from_spectrum(ExcitationSpectrum::from_modes(compute_spectrum(cfg, a, method)));
  write_output(o.out, cfg, pmf_filename(a, method), [&](std::ostream& out) { write_pmf_csv(out, dist.pmf); });
  return 0;
}

int run_cumulants(const Overrides& o) {
  SweepConfig cfg = resolve(o);
  SweepResult result = run_sweep(cfg);
  write_output(o.out, cfg, "cumulants.csv", [&](std::ostream& out) { write_records_csv(out, result.records); });
  for (const auto& f : result.failures) {
    std::cerr << "error: A=" << f.a << " method=" << to_string(f.method) << ": " << f.message << '\n';
  }
  return result.failures.empty() ? 0 : 2;
}

std::vector<PowerLawFit> fit_all(const SweepConfig& cfg, const std::vector<SweepRecord>& records) {
  std::vector<PowerLawFit> fits;
  std::vector<Method> methods;
  for (const auto& r : records) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  }
  FitWindow window;
  if (cfg.fit_window) {
    window = *cfg.fit_window;
  } else {
    double lo = records.front().a, hi = records.front().a;
    for (const auto& r : records) {
      lo = std::min(lo, r.a);
      hi = std::max(hi, r.a);
    }
    window = {std::max(2.0, lo), std::min(50.0, hi)};
  }
  for (Method m : methods) {
    for (int q = 1; q <= 3; ++q) {
      try {
        fits.push_back(fit_power_law(records, q, window, m));
        for (const auto& w : fits.back().warnings) std::cerr << "warning: " << w << '\n';
      } catch (const ValidationError& e) {
        std::cerr << "warning: no fit for kappa" << q << " (" << to_string(m) << "): " << e.what() << '\n';
      }
    }
  }
  return fits;
}

int run_sweep_cmd(const Overrides& o) {
  const SweepConfig cfg = resolve(o);
  const SweepResult result = run_sweep(cfg);
  const auto fits = result.records.empty() ? std::vector<PowerLawFit>{} : fit_all(cfg, result.records);
  const auto files = emit(cfg, result.records, fits, result.failures, cfg.out_dir, cfg.format);
  for (const auto& p : files.paths) std::cerr << "wrote " << p.string() << '\n';
  for (const auto& f : result.failures) {
    std::cerr << "error: A=" << f.a << " method=" << to_string(f.method) << ": " << f.message << '\n';
  }
  return result.failures.empty() ? 0 : 2;
}

void print_fits(std::ostream& out, const std::vector<PowerLawFit>& fits) {
  out << "q,method,exponent,amplitude,stderr,window_lo,window_hi,points\n";
  for (const auto& f : fits) {
    out << f.q << ',' << (f.method ? to_string(*f.method) : "") << ',' << format_double(f.exponent) << ','
        << format_double(f.amplitude) << ',' << format_double(f.stderr_exponent) << ','
        << format_double(f.window.lo) << ',' << format_double(f.window.hi) << ',' << f.points << '\n';
  }
}

int run_fit(const Overrides& o, const std::optional<std::string>& in_path) {
  std::vector<SweepRecord> records;
  SweepConfig cfg;
  if (in_path) {
    std::ifstream in(*in_path);
    if (!in) throw IoError("cannot open '" + *in_path + "'");
    records = read_records_csv(in);
    if (records.empty()) throw ValidationError("'" + *in_path + "' holds no records");
    if (o.fit_window.size() == 2) cfg.fit_window = FitWindow{o.fit_window[0], o.fit_window[1]};
    if (o.out) cfg.out_dir = *o.out;
  } else {
    cfg = resolve(o);
    auto result = run_sweep(cfg);
    if (!result.failures.empty()) {
      for (const auto& f : result.failures) {
        std::cerr << "error: A=" << f.a << " method=" << to_string(f.method) << ": " << f.message << '\n';
      }
      return 2;
    }
    records = std::move(result.records);
  }
  const auto fits = fit_all(cfg, records);
  write_output(o.out, cfg, "fits.csv", [&](std::ostream& out) { print_fits(out, fits); });
  return 0;
}

int run_oracle(const Overrides& o) {
  Overrides local = o;
  if (!local.n && !local.config) local.n = 8;
  SweepConfig cfg = resolve(local);
  if (cfg.schedule != ScheduleKind::LinearRamp) {
    throw ValidationError("the oracle integrates the linear ramp only");
  }
  const ChainSpec spec{cfg.n, 1.0};
  if (spec.n > kMaxCrossValidationSites) {
    throw ValidationError("oracle cross-validation is limited to N <= " + std::to_string(kMaxCrossValidationSites));
  }
  nlohmann::json report = nlohmann::json::array();
  bool all_passed = true;
  for (double a : cfg.a_values) {
    const auto r = cross_validate(spec, cfg.schedule_for(a), cfg.integrator, cfg.threads);
    all_passed = all_passed && r.passed;
    report.push_back({{"N", spec.n},
                      {"A", a},
                      {"tv_distance", r.tv_distance},
                      {"kappa_deviation", {r.cumulant_deviation.kappa1, r.cumulant_deviation.kappa2,
                                           r.cumulant_deviation.kappa3}},
                      {"oracle_kappa", {r.oracle.kappa1, r.oracle.kappa2, r.oracle.kappa3}},
                      {"momentum_kappa", {r.momentum.kappa1, r.momentum.kappa2, r.momentum.kappa3}},
                      {"k", r.k},
                      {"p_oracle", r.p_oracle},
                      {"p_momentum", r.p_momentum},
                      {"max_mode_deviation", r.max_mode_deviation},
                      {"max_odd_weight", r.max_odd_weight},
                      {"norm_drift", r.norm_drift},
                      {"oracle_pmf", r.oracle.pmf},
                      {"momentum_pmf", r.momentum.pmf},
                      {"tolerance", kCrossValidationTolerance},
                      {"passed", r.passed}});
  }
  write_output(o.out, cfg, "oracle.json", [&](std::ostream& out) { out << report.dump(2) << '\n'; });
  if (!all_passed) std::cerr << "error: oracle and momentum-space results disagree beyond tolerance\n";
  return all_passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kink counting statistics of the quenched transverse-field Ising chain"};
  app.require_subcommand(1);

  Overrides pk, dist, cum, sweep, fit, oracle;
  std::optional<std::string> fit_in;

  auto* pk_cmd = app.add_subcommand("pk", "per-mode excitation probabilities for one A");
  add_common(pk_cmd, pk);
  auto* dist_cmd = app.add_subcommand("dist", "kink-pair PMF for one A");
  add_common(dist_cmd, dist);
  auto* cum_cmd = app.add_subcommand("cumulants", "first three kink-pair cumulants per A and method");
  add_common(cum_cmd, cum);
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep A over methods, fit power laws, write results");
  add_common(sweep_cmd, sweep);
  auto* fit_cmd = app.add_subcommand("fit", "power-law fits of kappa_q(A)");
  add_common(fit_cmd, fit);
  fit_cmd->add_option("--in", fit_in, "records CSV to fit instead of running a sweep");
  auto* oracle_cmd = app.add_subcommand("oracle", "cross-check against exact spin-chain evolution (N <= 12)");
  add_common(oracle_cmd, oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*pk_cmd) return run_pk(pk);
    if (*dist_cmd) return run_dist(dist);
    if (*cum_cmd) return run_cumulants(cum);
    if (*sweep_cmd) return run_sweep_cmd(sweep);
    if (*fit_cmd) return run_fit(fit, fit_in);
    if (*oracle_cmd) return run_oracle(oracle);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
