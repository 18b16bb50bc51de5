#include "kzfcs/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <sstream>

#include "kzfcs/errors.hpp"

namespace kzfcs {

std::string to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv:
      return "csv";
    case OutputFormat::Json:
      return "json";
    case OutputFormat::Both:
      return "both";
  }
  return "csv";
}

OutputFormat output_format_from_string(const std::string& name) {
  if (name == "csv" || name == "CSV") return OutputFormat::Csv;
  if (name == "json" || name == "JSON") return OutputFormat::Json;
  if (name == "both") return OutputFormat::Both;
  throw ValidationError("unknown output format '" + name + "' (expected csv, json or both)");
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) {
    throw ValidationError("log-spaced grid needs 0 < a_min <= a_max and at least one point");
  }
  if (n == 1) return {lo};
  std::vector<double> values(static_cast<std::size_t>(n));
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  values.front() = lo;
  values.back() = hi;
  return values;
}

std::vector<std::string> SweepConfig::validate() const {
  ChainSpec{n, 1.0}.validate();
  if (a_values.empty()) throw ValidationError("sweep needs at least one A value");
  for (double a : a_values) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("A values must be positive and finite");
  }
  if (!std::is_sorted(a_values.begin(), a_values.end())) {
    throw ValidationError("A values must be sorted ascending");
  }
  if (methods.empty()) throw ValidationError("sweep needs at least one method");
  dephasing.validate();
  integrator.validate();
  if (fit_window) {
    if (!(fit_window->lo > 0.0) || !(fit_window->hi > fit_window->lo)) {
      throw ValidationError("fit window must satisfy 0 < lo < hi");
    }
    if (fit_window->lo < a_values.front() || fit_window->hi > a_values.back()) {
      throw ValidationError("fit window must lie within the swept A range");
    }
  }
  return schedule_for(a_values.front()).validate();
}

QuenchSchedule SweepConfig::schedule_for(double quench) const {
  return {schedule, g_start, g_end, quench, rabi_time};
}

FitWindow SweepConfig::effective_fit_window() const {
  if (fit_window) return *fit_window;
  if (a_values.empty()) throw ValidationError("sweep needs at least one A value");
  return {std::max(2.0, a_values.front()), std::min(50.0, a_values.back())};
}

namespace {

nlohmann::json physics_json(const SweepConfig& cfg) {
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  nlohmann::json doc{
      {"n", cfg.n},
      {"a_values", cfg.a_values},
      {"schedule", to_string(cfg.schedule)},
      {"g_start", cfg.g_start},
      {"g_end", cfg.g_end},
      {"rabi_time", cfg.rabi_time},
      {"methods", methods},
      {"gamma", cfg.dephasing.gamma},
      {"dephasing_basis", to_string(cfg.dephasing.basis)},
      {"integrator", to_string(cfg.integrator.method)},
      {"rel_tol", cfg.integrator.rel_tol},
      {"abs_tol", cfg.integrator.abs_tol},
      {"max_step", cfg.integrator.max_step},
      {"dump_pmf", cfg.dump_pmf},
  };
  if (cfg.fit_window) doc["fit_window"] = {cfg.fit_window->lo, cfg.fit_window->hi};
  return doc;
}

template <class T>
T get_or(const nlohmann::json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(millis));
  return out;
}

}  // namespace

nlohmann::json to_json(const SweepConfig& cfg) {
  nlohmann::json doc = physics_json(cfg);
  doc["out"] = cfg.out_dir;
  doc["format"] = to_string(cfg.format);
  doc["threads"] = cfg.threads;
  return doc;
}

SweepConfig sweep_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("config must be a flat JSON object");
  SweepConfig cfg;
  cfg.n = get_or(doc, "n", cfg.n);
  if (doc.contains("a_values")) {
    cfg.a_values = get_or(doc, "a_values", cfg.a_values);
  } else if (doc.contains("a_min") || doc.contains("a_max")) {
    const double lo = get_or(doc, "a_min", 1.0);
    const double hi = get_or(doc, "a_max", lo);
    cfg.a_values = log_spaced(lo, hi, get_or(doc, "a_points", 20));
  } else if (doc.contains("a")) {
    cfg.a_values = {get_or(doc, "a", 1.0)};
  }
  cfg.schedule = schedule_kind_from_string(get_or<std::string>(doc, "schedule", to_string(cfg.schedule)));
  cfg.g_start = get_or(doc, "g_start", cfg.g_start);
  cfg.g_end = get_or(doc, "g_end", cfg.g_end);
  cfg.rabi_time = get_or(doc, "rabi_time", cfg.rabi_time);
  if (doc.contains("methods")) {
    cfg.methods.clear();
    for (const auto& name : get_or<std::vector<std::string>>(doc, "methods", {})) {
      cfg.methods.push_back(method_from_string(name));
    }
  } else if (doc.contains("method")) {
    cfg.methods = {method_from_string(get_or<std::string>(doc, "method", "closed_form"))};
  }
  cfg.dephasing.gamma = get_or(doc, "gamma", cfg.dephasing.gamma);
  cfg.dephasing.basis =
      dephasing_basis_from_string(get_or<std::string>(doc, "dephasing_basis", to_string(cfg.dephasing.basis)));
  cfg.integrator.method =
      rk_method_from_string(get_or<std::string>(doc, "integrator", to_string(cfg.integrator.method)));
  cfg.integrator.rel_tol = get_or(doc, "rel_tol", cfg.integrator.rel_tol);
  cfg.integrator.abs_tol = get_or(doc, "abs_tol", cfg.integrator.abs_tol);
  cfg.integrator.max_step = get_or(doc, "max_step", cfg.integrator.max_step);
  if (doc.contains("fit_window")) {
    const auto w = get_or<std::vector<double>>(doc, "fit_window", {});
    if (w.size() != 2) throw ValidationError("fit_window must be a two-element array [lo, hi]");
    cfg.fit_window = FitWindow{w[0], w[1]};
  }
  cfg.out_dir = get_or(doc, "out", cfg.out_dir);
  cfg.format = output_format_from_string(get_or<std::string>(doc, "format", to_string(cfg.format)));
  cfg.dump_pmf = get_or(doc, "dump_pmf", cfg.dump_pmf);
  cfg.threads = get_or(doc, "threads", cfg.threads);
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  try {
    return sweep_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string config_hash(const SweepConfig& cfg) {
  const std::string text = physics_json(cfg).dump();
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::vector<ModeResult> compute_spectrum(const SweepConfig& cfg, double quench, Method method) {
  const ChainSpec spec{cfg.n, 1.0};
  switch (method) {
    case Method::ClosedForm:
      return closed_form_spectrum(spec, quench);
    case Method::Unitary:
      return excitation_spectrum(spec, cfg.schedule_for(quench), cfg.integrator, cfg.threads);
    case Method::Dephased:
      return dephased_spectrum(spec, cfg.schedule_for(quench), cfg.integrator, cfg.dephasing, cfg.threads);
  }
  throw ValidationError("unknown method");
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  SweepResult result;
  for (double a : cfg.a_values) {
    for (Method method : cfg.methods) {
      SweepRecord record;
      record.a = a;
      record.method = method;
      record.gamma = method == Method::Dephased ? cfg.dephasing.gamma : 0.0;
      record.config_hash = hash;
      record.started_at = utc_timestamp();
      try {
        const auto spectrum = ExcitationSpectrum::from_modes(compute_spectrum(cfg, a, method));
        record.cumulants = cumulants_from_spectrum(spectrum);
        if (cfg.dump_pmf) record.pmf = pmf_from_spectrum(spectrum).pmf;
      } catch (const NumericalError& e) {
        result.failures.push_back({a, method, e.what()});
        continue;
      }
      record.finished_at = utc_timestamp();
      result.records.push_back(std::move(record));
    }
  }
  return result;
}

PowerLawFit fit_power_law(const std::vector<SweepRecord>& records, int q, FitWindow window,
                          std::optional<Method> method) {
  if (q < 1 || q > 3) throw ValidationError("cumulant order must be 1, 2 or 3");
  std::vector<const SweepRecord*> selected;
  for (const auto& r : records) {
    if (method && r.method != *method) continue;
    if (r.a < window.lo || r.a > window.hi) continue;
    selected.push_back(&r);
  }
  if (!method && !selected.empty()) {
    for (const auto* r : selected) {
      if (r->method != selected.front()->method) {
        throw ValidationError("records mix methods; select one method to fit");
      }
    }
  }
  if (selected.size() < 3) {
    std::ostringstream msg;
    msg << "power-law fit needs at least 3 records in [" << window.lo << ", " << window.hi << "], found "
        << selected.size();
    throw ValidationError(msg.str());
  }
  std::stable_sort(selected.begin(), selected.end(), [](const auto* x, const auto* y) { return x->a < y->a; });

  PowerLawFit fit;
  fit.q = q;
  fit.method = method ? method : std::optional<Method>(selected.front()->method);
  fit.window = window;
  fit.points = static_cast<int>(selected.size());

  for (const auto* r : selected) {
    if (!(r->cumulants[q] > 0.0)) {
      std::ostringstream msg;
      msg << "kappa" << q << "=" << r->cumulants[q] << " at A=" << r->a << " is not positive; log undefined";
      throw ValidationError(msg.str());
    }
  }
  for (std::size_t i = 1; i < selected.size(); ++i) {
    if (selected[i]->cumulants[q] > selected[i - 1]->cumulants[q]) {
      std::ostringstream msg;
      msg << "kappa" << q << " is non-monotone in the fit window: it rises from A=" << selected[i - 1]->a
          << " to A=" << selected[i]->a << " (anti-KZM upturn?)";
      fit.warnings.push_back(msg.str());
      break;
    }
  }

  const double count = static_cast<double>(selected.size());
  double mx = 0.0, my = 0.0;
  for (const auto* r : selected) {
    mx += std::log(r->a);
    my += std::log(r->cumulants[q]);
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (const auto* r : selected) {
    const double dx = std::log(r->a) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(r->cumulants[q]) - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("power-law fit needs at least two distinct A values");
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.amplitude = std::exp(intercept);
  double ssr = 0.0;
  for (const auto* r : selected) {
    const double e = std::log(r->cumulants[q]) - (intercept + fit.exponent * std::log(r->a));
    ssr += e * e;
  }
  fit.stderr_exponent = std::sqrt(ssr / (count - 2.0) / sxx);
  return fit;
}

}  // namespace kzfcs
