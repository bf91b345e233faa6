#include "pointerlab/property_suite.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "pointerlab/born_probability.hpp"
#include "pointerlab/error.hpp"
#include "pointerlab/macro_observables.hpp"

namespace pointerlab {

namespace {

using Rng = std::mt19937_64;

std::vector<Complex> random_vector(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> gauss;
  std::vector<Complex> v(dim);
  for (auto& x : v) x = {gauss(rng), gauss(rng)};
  return v;
}

StateVector random_state(int n, Rng& rng) {
  return StateVector::normalized(n, random_vector(dimension(n), rng));
}

Pair random_pair(Rng& rng) {
  std::normal_distribution<double> gauss;
  Complex a{gauss(rng), gauss(rng)}, b{gauss(rng), gauss(rng)};
  const double norm = std::sqrt(std::norm(a) + std::norm(b));
  return {a / norm, b / norm};
}

Complex dot(std::span<const Complex> a, std::span<const Complex> b) {
  Complex sum{};
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum;
}

double distance(std::span<const Complex> a, std::span<const Complex> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::norm(a[i] - b[i]);
  return std::sqrt(sum);
}

double energy(const Operator& h, const StateVector& s) {
  return dot(s.amplitudes(), h.apply(s.amplitudes())).real();
}

PropertyResult judge(std::string name, double residual, double tolerance,
                     std::string detail = {}) {
  PropertyResult r{std::move(name), PropertyStatus::pass, residual, tolerance, std::move(detail)};
  if (!(residual <= tolerance)) r.status = PropertyStatus::fail;
  return r;
}

PropertyResult skipped(std::string name, double tolerance, std::string reason) {
  return {std::move(name), PropertyStatus::skipped, 0.0, tolerance, std::move(reason)};
}

std::vector<double> oracle_times(int samples) {
  std::vector<double> times(samples);
  for (int i = 0; i < samples; ++i) times[i] = 50.0 * i / std::max(samples - 1, 1);
  return times;
}

// States along one trajectory, stepping from sample to sample.
std::vector<StateVector> states_at(const Propagator& prop, const StateVector& s,
                                   const std::vector<double>& times) {
  std::vector<StateVector> out;
  out.reserve(times.size());
  StateVector state = s;
  double now = 0.0;
  for (double t : times) {
    if (t != now) state = prop.advance(state, t - now, times.back());
    now = t;
    out.push_back(state);
  }
  return out;
}

ProductFactors basis_sequence(int n, unsigned bits) {
  ProductFactors f;
  f.particle = {Complex{1.0}, Complex{0.0}};
  f.units.resize(n);
  for (int k = 0; k < n; ++k) {
    f.units[k] = ((bits >> k) & 1U) ? Pair{Complex{0.0}, Complex{1.0}}
                                    : Pair{Complex{1.0}, Complex{0.0}};
  }
  return f;
}

PropertyResult hermiticity(const Operator& h, int vectors, Rng& rng) {
  double worst = 0.0;
  const std::size_t dim = dimension(h.units());
  for (int i = 0; i < vectors; ++i) {
    const auto a = random_vector(dim, rng);
    const auto b = random_vector(dim, rng);
    const double scale = std::sqrt(dot(a, a).real() * dot(b, b).real());
    const Complex lhs = dot(a, h.apply(b));
    const Complex rhs = dot(h.apply(a), b);
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return judge("hermiticity", worst, 1e-10,
               fmt::format("max |<a|Hb> - <Ha|b>| over {} normalized pairs", vectors));
}

PropertyResult trigger_stationarity(const Operator& h, const ModelSpec& spec) {
  constexpr double tol = 1e-12;
  if (spec.self_energy != 0.0) {
    return skipped("trigger_stationarity", tol,
                   "nonzero self energy: the undetectable branch is not stationary");
  }
  const StateVector s = initial_state(spec, Complex{1.0}, Complex{0.0});
  const auto hs = h.apply(s.amplitudes());
  return judge("trigger_stationarity", std::sqrt(dot(hs, hs).real()), tol,
               "||H (psi0(alpha) x |1...1>)||");
}

PropertyResult oracle_equivalence(const Propagator& prop, const ModelSpec& spec, int samples) {
  constexpr double tol = 1e-8;
  if (spec.self_energy != 0.0) {
    return skipped("oracle_equivalence", tol, "nonzero self energy: no closed form");
  }
  const StateVector s = initial_state(spec, Complex{0.0}, Complex{1.0});
  const auto times = oracle_times(samples);
  const auto evolved = states_at(prop, s, times);
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const StateVector exact = make_product_state(closed_form_branch(spec, times[i]));
    worst = std::max(worst, distance(evolved[i].amplitudes(), exact.amplitudes()));
  }
  return judge("oracle_equivalence", worst, tol,
               fmt::format("sup over {} times in [0, 50] against the product closed form",
                           samples));
}

PropertyResult dense_vs_krylov(const Operator& h, const ModelSpec& spec,
                               const EvolutionConfig& cfg, int samples, Rng& rng) {
  constexpr double tol = 1e-9;
  if (h.units() > kMaxDenseUnits) {
    return skipped("dense_vs_krylov", tol, fmt::format("n > {}", kMaxDenseUnits));
  }
  EvolutionConfig dense_cfg = cfg;
  dense_cfg.method = EvolutionMethod::dense_eigen;
  EvolutionConfig krylov_cfg = cfg;
  krylov_cfg.method = EvolutionMethod::iterative_krylov;
  krylov_cfg.tolerance = std::min(cfg.tolerance, 1e-10);
  const Propagator dense(h, dense_cfg);
  const Propagator krylov(h, krylov_cfg);
  const StateVector starts[] = {initial_state(spec, Complex{std::sqrt(0.5)},
                                              Complex{std::sqrt(0.5)}),
                                random_state(h.units(), rng)};
  const auto times = oracle_times(samples);
  double worst = 0.0;
  for (const auto& s : starts) {
    const auto stepped = states_at(krylov, s, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      worst = std::max(worst, distance(dense.evolve(s, times[i]).amplitudes(),
                                       stepped[i].amplitudes()));
    }
  }
  return judge("dense_vs_krylov", worst, tol, "sup over t in [0, 50], two initial states");
}

void flow_properties(const Operator& h, const Propagator& prop, const ModelSpec& spec,
                     const PropertyOptions& options, Rng& rng,
                     std::vector<PropertyResult>& out) {
  const StateVector s0 = initial_state(spec, Complex{std::sqrt(0.3)}, Complex{std::sqrt(0.7)});
  const StateVector r0 = random_state(h.units(), rng);
  const double long_times[] = {1.0, 17.5, 50.0, options.long_time};

  double norm_err = 0.0, back_err = 0.0, energy_err = 0.0;
  for (const auto* s : {&s0, &r0}) {
    const double e0 = energy(h, *s);
    for (double t : long_times) {
      const StateVector st = prop.evolve(*s, t);
      norm_err = std::max(norm_err, std::abs(st.norm() - 1.0));
      energy_err = std::max(energy_err, std::abs(energy(h, st) - e0));
      const StateVector back = prop.evolve(st, -t);
      back_err = std::max(back_err, distance(back.amplitudes(), s->amplitudes()));
    }
  }
  out.push_back(judge("unitarity", norm_err, 1e-9,
                      fmt::format("max | ||s(t)|| - 1 | for t <= {}", options.long_time)));
  out.push_back(judge("reversibility", back_err, 1e-8, "|| U(-t) U(t) s - s ||"));
  out.push_back(judge("energy_conservation", energy_err, 1e-9, "max |<H>_t - <H>_0|"));

  // Superposition identity: U(c0 b0 + c1 b1) = c0 U b0 + c1 U b1.
  const Complex c0{std::sqrt(0.3), 0.0};
  const Complex c1{0.0, std::sqrt(0.7)};
  const StateVector b0 = initial_state(spec, Complex{1.0}, Complex{0.0});
  const StateVector b1 = initial_state(spec, Complex{0.0}, Complex{1.0});
  const StateVector sup = initial_state(spec, c0, c1);
  const auto times = oracle_times(options.oracle_samples);
  const auto sup_t = states_at(prop, sup, times);
  const auto b0_t = states_at(prop, b0, times);
  const auto b1_t = states_at(prop, b1, times);
  double lin_err = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto& us = sup_t[k];
    const auto& u0 = b0_t[k];
    const auto& u1 = b1_t[k];
    double sum = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
      sum += std::norm(us[i] - (c0 * u0[i] + c1 * u1[i]));
    }
    lin_err = std::max(lin_err, std::sqrt(sum));
  }
  out.push_back(judge("linearity", lin_err, 1e-9, "superposition vs weighted branch sum"));
}

PropertyResult substitution_bound(int n, const PropertyOptions& options) {
  constexpr double tol = 1e-12;
  double excess = random_pointer_excess(n, options.substitution_trials, options.seed);
  std::string detail = fmt::format("{} random trials", options.substitution_trials);
  if (n <= 6) {
    excess = std::max(excess, exhaustive_pointer_excess(n));
    detail += ", exhaustive over basis sequences";
  }
  return judge("substitution_bound", std::max(excess, 0.0), tol,
               "max(|f(v) - f(v')| - k/n, 0); " + detail);
}

PropertyResult pointer_projectors(int n, Rng& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const StateVector s = random_state(n, rng);
    double layered = 0.0;
    for (int j = 1; j <= n; ++j) {
      const PointerObservable obs(n, (j - 0.5) / n);
      for (double d : obs.projector_diagonal()) worst = std::max(worst, std::abs(d * d - d));
      layered += obs.threshold_probability(s) / n;
    }
    worst = std::max(worst, std::abs(layered - pointer_expectation(s)));
  }
  return judge("projector_consistency", worst, 1e-10,
               "idempotence of every threshold projector and layer-cake identity");
}

PropertyResult algebra_within(double alpha, Rng& rng) {
  double worst = pointer_algebra(Eigen::Matrix2cd(detection_projector(alpha).cast<Complex>()))
                     .max_commutator();
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 10; ++i) {
    Eigen::Matrix2cd g;
    g << gauss(rng), Complex{gauss(rng), gauss(rng)}, 0.0, gauss(rng);
    g(1, 0) = std::conj(g(0, 1));
    worst = std::max(worst, pointer_algebra(g).max_commutator());
  }
  return judge("algebra_within_setup", worst, 1e-12, "largest commutator inside one algebra");
}

PropertyResult algebra_cross(double alpha) {
  double worst = 0.0;
  for (int i = 0; i <= 16; ++i) {
    const double delta = std::numbers::pi * i / 16.0;
    const double alpha_prime = std::fmod(alpha + delta, std::numbers::pi);
    const double expected = std::abs(std::sin(delta) * std::cos(delta));
    worst = std::max(worst, std::abs(setup_commutator(alpha, alpha_prime) - expected));
  }
  return judge("algebra_cross_setup", worst, 1e-10,
               "||[P1(a), P1(a')]|| against |sin(d) cos(d)| on 17 offsets");
}

}  // namespace

std::string to_string(PropertyStatus status) {
  switch (status) {
    case PropertyStatus::pass: return "pass";
    case PropertyStatus::fail: return "fail";
    case PropertyStatus::skipped: return "skipped";
  }
  return "unknown";
}

double exhaustive_pointer_excess(int n) {
  if (n < 1 || n > 10) throw ValidationError("exhaustive substitution check needs 1 <= n <= 10");
  const unsigned count = 1U << n;
  std::vector<double> value(count);
  for (unsigned v = 0; v < count; ++v) {
    value[v] = pointer_expectation(make_product_state(basis_sequence(n, v)));
  }
  double worst = -1.0;
  for (unsigned v = 0; v < count; ++v) {
    for (unsigned w = 0; w < count; ++w) {
      const double k = std::popcount(v ^ w);
      worst = std::max(worst, std::abs(value[v] - value[w]) - k / n);
    }
  }
  return worst;
}

double random_pointer_excess(int n, int trials, std::uint64_t seed) {
  if (n < 2) throw ValidationError("random substitution check needs n >= 2");
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n)));
  std::vector<int> positions(n);
  double worst = -1.0;
  for (int trial = 0; trial < trials; ++trial) {
    ProductFactors base;
    base.particle = random_pair(rng);
    for (int k = 0; k < n; ++k) base.units.push_back(random_pair(rng));
    ProductFactors changed = base;
    const int k = std::uniform_int_distribution<int>(1, n - 1)(rng);
    std::iota(positions.begin(), positions.end(), 0);
    std::shuffle(positions.begin(), positions.end(), rng);
    for (int p = 0; p < k; ++p) changed.units[positions[p]] = random_pair(rng);
    const double dev = std::abs(pointer_expectation(make_product_state(base)) -
                                pointer_expectation(make_product_state(changed)));
    worst = std::max(worst, dev - static_cast<double>(k) / n);
  }
  return worst;
}

std::vector<PropertyResult> run_property_suite(const Operator& hamiltonian,
                                               const ModelSpec& spec,
                                               const EvolutionConfig& cfg,
                                               const PropertyOptions& options) {
  spec.validate();
  cfg.validate();
  if (hamiltonian.units() != spec.n) {
    throw DimensionError(fmt::format("operator has n = {}, spec has n = {}",
                                     hamiltonian.units(), spec.n));
  }
  if (spec.n > kMaxDenseUnits) {
    throw ValidationError(fmt::format("property suite limited to n <= {}", kMaxDenseUnits));
  }
  Rng rng(options.seed);
  const Propagator prop(hamiltonian, cfg);

  std::vector<PropertyResult> out;
  out.push_back(hermiticity(hamiltonian, options.random_vectors, rng));
  out.push_back(trigger_stationarity(hamiltonian, spec));
  out.push_back(oracle_equivalence(prop, spec, options.oracle_samples));
  out.push_back(dense_vs_krylov(hamiltonian, spec, cfg, options.oracle_samples, rng));
  flow_properties(hamiltonian, prop, spec, options, rng, out);
  if (spec.n >= 2) {
    out.push_back(substitution_bound(spec.n, options));
  } else {
    out.push_back(skipped("substitution_bound", 1e-12, "needs n >= 2"));
  }
  out.push_back(pointer_projectors(spec.n, rng));
  out.push_back(algebra_within(spec.alpha, rng));
  out.push_back(algebra_cross(spec.alpha));
  return out;
}

bool all_passed(const std::vector<PropertyResult>& results) {
  return std::none_of(results.begin(), results.end(),
                      [](const auto& r) { return r.status == PropertyStatus::fail; });
}

}  // namespace pointerlab
