#include "kzfcs/oracle.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "kzfcs/errors.hpp"

namespace kzfcs {

namespace {

void check_sites(int n, int limit) {
  if (n > limit) {
    throw ValidationError("spin-chain oracle supports N <= " + std::to_string(limit) + ", got " +
                          std::to_string(n));
  }
}

std::uint32_t full_mask(int n) { return (n == 32) ? ~0u : ((1u << n) - 1u); }

int wall_count(std::uint32_t b, int n) {
  const std::uint32_t rotated = ((b >> 1) | (b << (n - 1))) & full_mask(n);
  return std::popcount(b ^ rotated);
}

// Projection onto the even spin-flip sector, in place.
template <class T>
void project_even(std::vector<T>& v, int n) {
  const std::uint32_t mask = full_mask(n);
  for (std::uint32_t b = 0; b < v.size(); ++b) {
    const std::uint32_t f = b ^ mask;
    if (f < b) continue;
    const T avg = 0.5 * (v[b] + v[f]);
    v[b] = avg;
    v[f] = avg;
  }
}

}  // namespace

double SpinState::norm_squared() const {
  double acc = 0.0;
  for (const auto& a : amplitudes) acc += std::norm(a);
  return acc;
}

double SpinState::odd_parity_weight() const {
  const std::uint32_t mask = full_mask(n);
  double acc = 0.0;
  for (std::uint32_t b = 0; b < amplitudes.size(); ++b) {
    acc += 0.25 * std::norm(amplitudes[b] - amplitudes[b ^ mask]);
  }
  return acc;
}

std::complex<double> SpinState::overlap(const SpinState& other) const {
  std::complex<double> acc = 0.0;
  for (std::size_t b = 0; b < amplitudes.size(); ++b) acc += std::conj(amplitudes[b]) * other.amplitudes[b];
  return acc;
}

SpinState basis_state(int n, std::uint32_t bits) {
  check_sites(n, kMaxOracleSites);
  SpinState s{n, std::vector<std::complex<double>>(std::size_t{1} << n, 0.0)};
  s.amplitudes.at(bits) = 1.0;
  return s;
}

std::vector<int> kink_table(int n) {
  check_sites(n, kMaxOracleSites);
  std::vector<int> walls(std::size_t{1} << n);
  for (std::uint32_t b = 0; b < walls.size(); ++b) walls[b] = wall_count(b, n);
  return walls;
}

IsingHamiltonian::IsingHamiltonian(const ChainSpec& spec, double g) : n_(spec.n), coupling_(spec.coupling), g_(g) {
  spec.validate();
  check_sites(n_, kMaxOracleSites);
  const auto walls = kink_table(n_);
  diagonal_.resize(walls.size());
  // sum_m sz_m sz_{m+1} = N - 2 W(b)
  for (std::size_t b = 0; b < walls.size(); ++b) diagonal_[b] = -coupling_ * (n_ - 2.0 * walls[b]);
}

namespace {

template <class T>
void apply_ising(const std::vector<double>& diagonal, int n, double transverse, std::span<const T> in,
                 std::span<T> out) {
  const std::size_t dim = diagonal.size();
  for (std::uint32_t b = 0; b < dim; ++b) {
    T flips{};
    for (int m = 0; m < n; ++m) flips += in[b ^ (1u << m)];
    out[b] = diagonal[b] * in[b] + transverse * flips;
  }
}

}  // namespace

void IsingHamiltonian::apply(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const {
  apply_ising(diagonal_, n_, -coupling_ * g_, in, out);
}

void IsingHamiltonian::apply(std::span<const double> in, std::span<double> out) const {
  apply_ising(diagonal_, n_, -coupling_ * g_, in, out);
}

double IsingHamiltonian::expectation(const SpinState& state) const {
  std::vector<std::complex<double>> h(state.amplitudes.size());
  apply(state.amplitudes, h);
  std::complex<double> acc = 0.0;
  for (std::size_t b = 0; b < h.size(); ++b) acc += std::conj(state.amplitudes[b]) * h[b];
  return acc.real();
}

IsingHamiltonian build_hamiltonian(const ChainSpec& spec, double g) { return IsingHamiltonian(spec, g); }

SpinState apply_parity(const SpinState& state) {
  const std::uint32_t mask = full_mask(state.n);
  SpinState out{state.n, std::vector<std::complex<double>>(state.amplitudes.size())};
  for (std::uint32_t b = 0; b < out.amplitudes.size(); ++b) out.amplitudes[b] = state.amplitudes[b ^ mask];
  return out;
}

GroundState ground_state(const ChainSpec& spec, double g) {
  const IsingHamiltonian h(spec, g);
  const std::size_t dim = h.dimension();
  const int n = spec.n;

  std::mt19937_64 rng(0x5eed1e55u);
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (double& x : v) x = normal(rng);
  project_even(v, n);

  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  };
  auto normalize = [&](std::vector<double>& a) {
    const double len = std::sqrt(dot(a, a));
    for (double& x : a) x /= len;
    return len;
  };
  normalize(v);

  const std::size_t max_iter = std::min<std::size_t>(dim, 400);
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> w(dim);
  Eigen::VectorXd ritz;
  double energy = 0.0;

  basis.push_back(v);
  for (std::size_t j = 0; j < max_iter; ++j) {
    h.apply(std::span<const double>(basis[j]), std::span<double>(w));
    alpha.push_back(dot(basis[j], w));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        const double c = dot(q, w);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= c * q[i];
      }
    }
    project_even(w, n);
    const double b = std::sqrt(dot(w, w));

    const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1))
                                : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    energy = tri.eigenvalues()(0);
    ritz = tri.eigenvectors().col(0);
    const double estimate = b * std::abs(ritz(m - 1));
    if (estimate < 1e-13 * std::max(1.0, std::abs(energy)) || b < 1e-13 || j + 1 == max_iter) break;

    beta.push_back(b);
    for (double& x : w) x /= b;
    basis.push_back(w);
  }

  std::vector<double> psi(dim, 0.0);
  for (std::size_t j = 0; j < static_cast<std::size_t>(ritz.size()); ++j) {
    for (std::size_t i = 0; i < dim; ++i) psi[i] += ritz(static_cast<Eigen::Index>(j)) * basis[j][i];
  }
  normalize(psi);
  h.apply(std::span<const double>(psi), std::span<double>(w));
  energy = dot(psi, w);
  double residual = 0.0;
  for (std::size_t i = 0; i < dim; ++i) residual += (w[i] - energy * psi[i]) * (w[i] - energy * psi[i]);

  GroundState out;
  out.energy = energy;
  out.residual = std::sqrt(residual);
  out.state = {n, std::vector<std::complex<double>>(psi.begin(), psi.end())};
  return out;
}

double ground_energy_dense(const ChainSpec& spec, double g) {
  check_sites(spec.n, 10);
  const IsingHamiltonian h(spec, g);
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<double> e(h.dimension()), col(h.dimension());
  for (Eigen::Index j = 0; j < dim; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    h.apply(std::span<const double>(e), std::span<double>(col));
    for (Eigen::Index i = 0; i < dim; ++i) dense(i, j) = col[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double momentum_ground_energy(const ChainSpec& spec, double g) {
  double acc = 0.0;
  for (const auto& mode : momentum_grid(spec)) acc -= dispersion(mode.k, g, spec);
  return acc;
}

ChainEvolution evolve_chain(const ChainSpec& spec, const QuenchSchedule& schedule, const IntegratorConfig& cfg) {
  spec.validate();
  check_sites(spec.n, kMaxOracleSites);
  schedule.validate();
  cfg.validate();
  if (schedule.kind != ScheduleKind::LinearRamp) {
    throw ValidationError("the spin-chain oracle evolves the linear ramp only");
  }

  ChainEvolution out;
  out.initial = ground_state(spec, schedule.g_start).state;
  out.state = out.initial;
  const double duration = schedule.duration(0.0);
  if (duration < kSuddenDuration) return out;

  // Dimensionless evolution: H / J with time in hbar / J.
  const ChainSpec unit{spec.n, 1.0};
  const IsingHamiltonian zz(unit, 0.0);
  const auto& diag = zz.diagonal();
  const int n = spec.n;
  const std::size_t dim = diag.size();
  const std::uint32_t mask = full_mask(n);
  const double dg_dt = (schedule.g_end - schedule.g_start) / duration;

  std::vector<double> y(2 * dim);
  for (std::size_t b = 0; b < dim; ++b) {
    y[2 * b] = out.initial.amplitudes[b].real();
    y[2 * b + 1] = out.initial.amplitudes[b].imag();
  }

  auto rhs = [&](double t, const std::vector<double>& psi, std::vector<double>& dpsi) {
    const double transverse = -(schedule.g_start + dg_dt * t);
    for (std::uint32_t b = 0; b < dim; ++b) {
      double re = 0.0, im = 0.0;
      for (int m = 0; m < n; ++m) {
        const std::uint32_t f = b ^ (1u << m);
        re += psi[2 * f];
        im += psi[2 * f + 1];
      }
      const double hre = diag[b] * psi[2 * b] + transverse * re;
      const double him = diag[b] * psi[2 * b + 1] + transverse * im;
      dpsi[2 * b] = him;
      dpsi[2 * b + 1] = -hre;
    }
  };
  auto watch = [&](double /*t*/, const std::vector<double>& psi) {
    double odd = 0.0, norm = 0.0;
    for (std::uint32_t b = 0; b < dim; ++b) {
      const std::uint32_t f = b ^ mask;
      const double dr = psi[2 * b] - psi[2 * f];
      const double di = psi[2 * b + 1] - psi[2 * f + 1];
      odd += 0.25 * (dr * dr + di * di);
      norm += psi[2 * b] * psi[2 * b] + psi[2 * b + 1] * psi[2 * b + 1];
    }
    out.max_odd_weight = std::max(out.max_odd_weight, odd);
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(norm - 1.0));
  };

  try {
    out.stats = integrate_rk(rhs, y, 0.0, duration, cfg, NoStepCap{}, watch);
  } catch (const NumericalError& e) {
    std::ostringstream msg;
    msg << e.what() << " (spin chain N=" << n << ", A=" << schedule.quench << ")";
    throw NumericalError(msg.str());
  }
  for (std::size_t b = 0; b < dim; ++b) out.state.amplitudes[b] = {y[2 * b], y[2 * b + 1]};
  return out;
}

KinkDistribution kink_pair_distribution(const SpinState& state) {
  const auto walls = kink_table(state.n);
  std::vector<double> pmf(static_cast<std::size_t>(state.n / 2 + 1), 0.0);
  for (std::size_t b = 0; b < walls.size(); ++b) {
    // W(b) is even on a ring.
    pmf[static_cast<std::size_t>(walls[b] / 2)] += std::norm(state.amplitudes[b]);
  }
  KinkDistribution dist{std::move(pmf), 0.0, 0.0, 0.0};
  const Cumulants c = dist.moments();
  dist.kappa1 = c.kappa1;
  dist.kappa2 = c.kappa2;
  dist.kappa3 = c.kappa3;
  return dist;
}

namespace {

using Amplitudes = std::vector<std::complex<double>>;

// out += coef * c_j in, or coef * c_j^dag in, with site j 0-based.
// Jordan-Wigner: sx_j = 1 - 2 n_j, sz_j = -(c_j^dag + c_j) prod_{i<j} sx_i.
// Locally c = |e><o| up to sign with |e>, |o> the sx = +1, -1 states.
void add_fermion(const Amplitudes& in, Amplitudes& out, int j, std::complex<double> coef, bool dagger) {
  const std::uint32_t bit = 1u << j;
  const std::uint32_t string = bit - 1u;
  for (std::uint32_t b = 0; b < in.size(); ++b) {
    const std::complex<double> a = in[b];
    if (a == 0.0) continue;
    const std::uint32_t f = b ^ string;
    const double low_sign = dagger ? -0.5 : ((b & bit) ? 0.5 : -0.5);
    const double high_sign = dagger ? 0.5 : ((b & bit) ? 0.5 : -0.5);
    out[f & ~bit] += coef * low_sign * a;
    out[f | bit] += coef * high_sign * a;
  }
}

std::complex<double> inner(const Amplitudes& a, const Amplitudes& b) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

}  // namespace

std::vector<double> mode_energies(const SpinState& state, const ChainSpec& spec, double g) {
  spec.validate();
  check_sites(spec.n, kMaxOracleSites);
  const int n = spec.n;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const std::complex<double> phase = std::polar(1.0, std::numbers::pi / 4.0);

  std::vector<double> energies;
  for (const auto& mode : momentum_grid(spec)) {
    const double k = mode.k;
    Amplitudes ck(state.amplitudes.size()), cmk(state.amplitudes.size()), cmk_dag(state.amplitudes.size());
    // c_k = e^{i pi/4} N^{-1/2} sum_m e^{-ikm} c_m, sites m = 1..N.
    for (int m = 1; m <= n; ++m) {
      const std::complex<double> wave = std::polar(inv_sqrt_n, -k * m);
      add_fermion(state.amplitudes, ck, m - 1, phase * wave, false);
      add_fermion(state.amplitudes, cmk, m - 1, phase * std::conj(wave), false);
      add_fermion(state.amplitudes, cmk_dag, m - 1, std::conj(phase) * wave, true);
    }
    const double occupation = inner(ck, ck).real() + inner(cmk, cmk).real();
    const double anomalous = 2.0 * inner(ck, cmk_dag).real();
    const double a = 2.0 * spec.coupling * (g - std::cos(k));
    const double b = 2.0 * spec.coupling * std::sin(k);
    energies.push_back(a * (occupation - 1.0) + b * anomalous);
  }
  return energies;
}

std::vector<double> mode_occupations(const SpinState& state, const ChainSpec& spec, double g) {
  const auto energies = mode_energies(state, spec, g);
  const auto grid = momentum_grid(spec);
  std::vector<double> p(energies.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    // <Psi^dag H_k Psi> = eps_k (2 p_k - 1) for pair-created quasiparticles.
    p[i] = std::clamp(0.5 * (1.0 + energies[i] / dispersion(grid[i].k, g, spec)), 0.0, 1.0);
  }
  return p;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t len = std::max(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    acc += std::abs(x - y);
  }
  return 0.5 * acc;
}

CrossValidationReport cross_validate(const ChainSpec& spec, const QuenchSchedule& schedule,
                                     const IntegratorConfig& cfg, unsigned threads) {
  spec.validate();
  check_sites(spec.n, kMaxCrossValidationSites);

  CrossValidationReport report;
  const ChainEvolution chain = evolve_chain(spec, schedule, cfg);
  report.oracle = kink_pair_distribution(chain.state);
  report.max_odd_weight = chain.max_odd_weight;
  report.norm_drift = std::abs(chain.state.norm_squared() - 1.0);
  report.p_oracle = mode_occupations(chain.state, spec, schedule.g_end);

  const auto modes = excitation_spectrum(spec, schedule, cfg, threads);
  report.momentum = pmf_from_spectrum(ExcitationSpectrum::from_modes(modes));
  for (const auto& m : modes) {
    report.k.push_back(m.k);
    report.p_momentum.push_back(m.p);
  }

  report.tv_distance = total_variation(report.oracle.pmf, report.momentum.pmf);
  report.cumulant_deviation = {std::abs(report.oracle.kappa1 - report.momentum.kappa1),
                               std::abs(report.oracle.kappa2 - report.momentum.kappa2),
                               std::abs(report.oracle.kappa3 - report.momentum.kappa3)};
  for (std::size_t i = 0; i < modes.size(); ++i) {
    report.max_mode_deviation =
        std::max(report.max_mode_deviation, std::abs(report.p_oracle[i] - report.p_momentum[i]));
  }
  report.passed = report.tv_distance < kCrossValidationTolerance;
  return report;
}

}  // namespace kzfcs
