// Acceptance checks. One PASS/FAIL line per criterion; `--criterion N`
// runs a single one. Exit status is nonzero when any selected check fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kzfcs/counting.hpp"
#include "kzfcs/emit.hpp"
#include "kzfcs/lz_engine.hpp"
#include "kzfcs/oracle.hpp"
#include "kzfcs/sweep.hpp"

using namespace kzfcs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

QuenchSchedule ramp(double a) {
  QuenchSchedule s;
  s.quench = a;
  return s;
}

SweepConfig closed_form_sweep() {
  SweepConfig cfg;
  cfg.n = 1000;
  cfg.a_values = log_spaced(2.0, 50.0, 20);
  return cfg;
}

Outcome kzm_exponent() {
  const auto records = run_sweep(closed_form_sweep()).records;
  const auto fit = fit_power_law(records, 1, {2.0, 50.0});
  const double err = std::abs(fit.exponent + 0.5);
  return {records.size() == 20 && err <= 0.01,
          fmt("kappa1 exponent %.6f (stderr %.2e), |err| %.2e <= 0.01", fit.exponent, fit.stderr_exponent, err)};
}

Outcome higher_exponents() {
  const auto records = run_sweep(closed_form_sweep()).records;
  const auto f2 = fit_power_law(records, 2, {2.0, 50.0});
  const auto f3 = fit_power_law(records, 3, {2.0, 50.0});
  const double e2 = std::abs(f2.exponent + 0.5), e3 = std::abs(f3.exponent + 0.5);
  return {e2 <= 0.01 && e3 <= 0.03,
          fmt("kappa2 exponent %.6f (|err| %.2e <= 0.01), kappa3 exponent %.6f (|err| %.2e <= 0.03)", f2.exponent,
              e2, f3.exponent, e3)};
}

Outcome universal_ratios() {
  const auto c = cumulants_from_spectrum(ExcitationSpectrum::from_modes(closed_form_spectrum({1000, 1.0}, 10.0)));
  const double r2 = c.kappa2 / c.kappa1, r3 = c.kappa3 / c.kappa1;
  const double d2 = std::abs(r2 / 0.292893 - 1), d3 = std::abs(r3 / 0.033380 - 1);
  return {d2 <= 0.005 && d3 <= 0.05,
          fmt("kappa2/kappa1 %.6f (rel %.2e <= 5e-3), kappa3/kappa1 %.6f (rel %.2e <= 5e-2)", r2, d2, r3, d3)};
}

Outcome erf_fidelity() {
  const ChainSpec spec{100, 1.0};
  double worst[3] = {0, 0, 0};
  double worst_a[3] = {0, 0, 0};
  for (double a : log_spaced(1.0, 100.0, 61)) {
    const auto c = cumulants_from_spectrum(ExcitationSpectrum::from_modes(closed_form_spectrum(spec, a)));
    for (int q = 1; q <= 2; ++q) {
      const double rel = std::abs(exact_cumulant(q, spec.n, a) / c[q] - 1);
      if (rel > worst[q]) {
        worst[q] = rel;
        worst_a[q] = a;
      }
    }
  }
  return {worst[1] <= 0.01 && worst[2] <= 0.01,
          fmt("max rel deviation q=1 %.3e at A=%.3g, q=2 %.3e at A=%.3g (limit 1e-2, A in [1,100])", worst[1],
              worst_a[1], worst[2], worst_a[2])};
}

Outcome oracle_equivalence() {
  bool pass = true;
  std::string detail;
  for (double a : {0.5, 2.0, 10.0}) {
    const auto r = cross_validate({8, 1.0}, ramp(a), IntegratorConfig{});
    pass = pass && r.tv_distance < 1e-4;
    detail += fmt("A=%g TV %.2e; ", a, r.tv_distance);
  }
  return {pass, detail + "limit 1e-4"};
}

Outcome poisson_binomial() {
  std::mt19937_64 rng(20261015);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto spectrum = [&](std::size_t m) {
    std::vector<double> p(m);
    for (auto& x : p) x = u(rng);
    return p;
  };
  double worst_enum = 0.0;
  std::uniform_int_distribution<std::size_t> size(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = spectrum(size(rng));
    std::vector<double> brute(p.size() + 1, 0.0);
    for (std::uint64_t mask = 0; mask < (1ull << p.size()); ++mask) {
      double w = 1.0;
      for (std::size_t j = 0; j < p.size(); ++j) w *= (mask >> j & 1u) ? p[j] : 1 - p[j];
      brute[static_cast<std::size_t>(std::popcount(mask))] += w;
    }
    const auto dp = pmf_from_spectrum({p}).pmf;
    for (std::size_t n = 0; n < dp.size(); ++n) worst_enum = std::max(worst_enum, std::abs(dp[n] - brute[n]));
  }
  double worst_dft = 0.0;
  for (std::size_t m = 16; m <= 512; m *= 2) {
    const auto p = spectrum(m);
    const auto dp = pmf_from_spectrum({p}).pmf;
    const auto dft = pmf_via_characteristic({p}).pmf;
    for (std::size_t n = 0; n < dp.size(); ++n) worst_dft = std::max(worst_dft, std::abs(dp[n] - dft[n]));
  }
  return {worst_enum <= 1e-12 && worst_dft <= 1e-9,
          fmt("DP vs enumeration %.2e <= 1e-12 (200 spectra), DP vs DFT %.2e <= 1e-9 (up to 512 modes)", worst_enum,
              worst_dft)};
}

double max_mode_gap(double a) {
  const ChainSpec spec{100, 1.0};
  const auto unitary = excitation_spectrum(spec, ramp(a), IntegratorConfig{});
  const auto closed = closed_form_spectrum(spec, a);
  double worst = 0.0;
  for (std::size_t i = 0; i < unitary.size(); ++i) worst = std::max(worst, std::abs(unitary[i].p - closed[i].p));
  return worst;
}

Outcome integrator_vs_formula() {
  bool pass = true;
  std::string detail;
  for (double a : {20.0, 50.0, 100.0}) {
    const double gap = max_mode_gap(a);
    pass = pass && gap < 0.01;
    detail += fmt("A=%g max|dp| %.2e < 0.01; ", a, gap);
  }
  for (double a : {0.5, 1.0}) {
    const double gap = max_mode_gap(a);
    pass = pass && gap > 0.02;
    detail += fmt("A=%g max|dp| %.3f > 0.02; ", a, gap);
  }
  return {pass, detail};
}

double gaussian_distance(int n) {
  const auto dist = pmf_from_spectrum(ExcitationSpectrum::from_modes(closed_form_spectrum({n, 1.0}, 1.0)));
  const double mean = kzm_mean(n, 1.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < dist.pmf.size(); ++k) {
    worst = std::max(worst, std::abs(dist.pmf[k] - gaussian_pmf(static_cast<int>(k), mean)));
  }
  return worst;
}

Outcome gaussian_approximation() {
  const double d400 = gaussian_distance(400), d800 = gaussian_distance(800);
  return {d400 < 0.02 && d800 < d400, fmt("sup distance N=400 %.4f < 0.02, N=800 %.4f (must shrink)", d400, d800)};
}

Outcome anti_kzm() {
  SweepConfig cfg;
  cfg.n = 100;
  cfg.a_values = log_spaced(10.0, 300.0, 10);
  cfg.methods = {Method::Dephased};
  cfg.dephasing.gamma = 1e-3;
  const auto records = run_sweep(cfg).records;
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].cumulants.kappa1 < records[argmin].cumulants.kappa1) argmin = i;
  }
  const bool interior = argmin > 0 && argmin + 1 < records.size();
  const bool upturn = interior && records.back().cumulants.kappa1 > records[argmin].cumulants.kappa1;
  std::string series;
  for (const auto& r : records) series += fmt("%.3g:%.3f ", r.a, r.cumulants.kappa1);
  return {records.size() == cfg.a_values.size() && upturn,
          fmt("kappa1 minimum at A=%.3g, final/min %.3f; ", records[argmin].a,
              records.back().cumulants.kappa1 / records[argmin].cumulants.kappa1) +
              "A:kappa1 " + series};
}

Outcome total_kinks() {
  SweepConfig cfg;
  cfg.n = 60;
  cfg.a_values = log_spaced(0.5, 50.0, 6);
  cfg.methods = {Method::ClosedForm, Method::Unitary, Method::Dephased};
  cfg.dephasing.gamma = 5e-3;
  const auto result = run_sweep(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "kzfcs_acceptance_total";
  std::filesystem::remove_all(dir);
  emit(cfg, result.records, {}, result.failures, dir, OutputFormat::Both);

  std::ifstream in(dir / "records.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0, bad = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    ++rows;
    for (int q = 1; q <= 3; ++q) {
      if (std::stod(f[4 + q]) != std::ldexp(std::stod(f[1 + q]), q)) ++bad;
    }
  }
  std::ifstream js(dir / "records.json");
  const auto doc = nlohmann::json::parse(js);
  for (const auto& r : doc["records"]) {
    for (int q = 1; q <= 3; ++q) {
      const std::string k = "kappa" + std::to_string(q);
      if (r[k + "_T"].get<double>() != std::ldexp(r[k].get<double>(), q)) ++bad;
    }
  }
  return {rows == 18 && bad == 0 && result.failures.empty(),
          fmt("%d CSV records and %zu JSON records checked, %d mismatches (exact equality)", rows,
              doc["records"].size(), bad)};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "KZM exponent", 5.0, kzm_exponent},
      {2, "higher-cumulant exponents", 5.0, higher_exponents},
      {3, "universal ratios", 1.0, universal_ratios},
      {4, "erf-form fidelity", 1.0, erf_fidelity},
      {5, "oracle equivalence", 120.0, oracle_equivalence},
      {6, "Poisson-binomial exactness", 60.0, poisson_binomial},
      {7, "integrator vs formula", 300.0, integrator_vs_formula},
      {8, "Gaussian approximation", 1.0, gaussian_approximation},
      {9, "anti-KZM upturn", 600.0, anti_kzm},
      {10, "total-kink conversion", 60.0, total_kinks},
  };

  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = out.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.2fs, budget %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                out.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : ", OVER BUDGET");
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
