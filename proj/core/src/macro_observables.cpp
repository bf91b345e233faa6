#include "pointerlab/macro_observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "pointerlab/error.hpp"

namespace pointerlab {

namespace {

void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ValidationError(fmt::format("threshold theta = {} outside (0, 1)", theta));
  }
}

Pair random_factor(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Complex a{gauss(rng), gauss(rng)};
  Complex b{gauss(rng), gauss(rng)};
  const double norm = std::sqrt(std::norm(a) + std::norm(b));
  return {a / norm, b / norm};
}

double averaged_value(const ObservableFamily& family, const ProductFactors& factors,
                      const DynamicsContext& context, double& tail) {
  const StateVector s = make_product_state(factors);
  if (context.T <= 0.0) return family.eval(s);
  const HamiltonianOperator h(context.model.with_units(factors.size()));
  const auto series = sample_trajectory(h, s, uniform_times(context.T, context.cfg.dt),
                                        {{family.name, family.eval}}, context.cfg);
  const auto avg = time_average(series, family.name);
  tail = std::max(tail, avg.tail_variation);
  return avg.mean;
}

}  // namespace

PointerObservable::PointerObservable(int n, double theta) : n_(n), theta_(theta) {
  check_unit_count(n);
  check_theta(theta);
  // Guard against theta * n landing a hair above an integer.
  min_count_ = static_cast<int>(std::ceil(theta * n - 1e-12));
}

double PointerObservable::weight(std::size_t index) const {
  return static_cast<double>(deexcited_count(index, n_)) / n_;
}

bool PointerObservable::detected(std::size_t index) const {
  return deexcited_count(index, n_) >= min_count_;
}

std::vector<double> PointerObservable::eigenvalues() const {
  std::vector<double> ev(n_ + 1);
  for (int m = 0; m <= n_; ++m) ev[m] = static_cast<double>(m) / n_;
  return ev;
}

std::vector<double> PointerObservable::projector_diagonal() const {
  std::vector<double> d(dimension(n_));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = detected(i) ? 1.0 : 0.0;
  return d;
}

double PointerObservable::expectation(const StateVector& s) const {
  if (s.units() != n_) throw DimensionError("pointer observable applied to wrong unit count");
  // Accumulate per de-excited count so the weights enter exactly once.
  std::vector<double> by_count(n_ + 1, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) by_count[deexcited_count(i, n_)] += std::norm(s[i]);
  double acc = 0.0;
  for (int m = 1; m <= n_; ++m) acc += by_count[m] * m;
  return std::clamp(acc / n_, 0.0, 1.0);
}

double PointerObservable::threshold_probability(const StateVector& s) const {
  if (s.units() != n_) throw DimensionError("pointer observable applied to wrong unit count");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (detected(i)) acc += std::norm(s[i]);
  }
  return std::clamp(acc, 0.0, 1.0);
}

double pointer_expectation(const StateVector& s) {
  return PointerObservable(s.units(), kDefaultThreshold).expectation(s);
}

double threshold_probability(const StateVector& s, double theta) {
  return PointerObservable(s.units(), theta).threshold_probability(s);
}

double unit_deexcitation(const StateVector& s, int k) {
  const int n = s.units();
  if (k < 0 || k >= n) throw ValidationError(fmt::format("unit {} out of range", k));
  const std::size_t mask = unit_mask(n, k);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(i & mask)) acc += std::norm(s[i]);
  }
  return acc;
}

ObservableFamily pointer_family() {
  return {"pointer", [](const StateVector& s) { return pointer_expectation(s); }};
}

ObservableFamily single_unit_family() {
  return {"single_unit", [](const StateVector& s) { return unit_deexcitation(s, 0); }};
}

ObservableFamily constant_family(double value) {
  return {"constant", [value](const StateVector&) { return value; }};
}

SubstitutionResult substitution_invariance(const ObservableFamily& family,
                                           const SubstitutionTest& test,
                                           const DynamicsContext& context) {
  const int n = test.base.size();
  test.base.validate();
  if (test.k < 0 || test.k >= n) {
    throw ValidationError(fmt::format("substitution count k = {} must satisfy 0 <= k < n = {}",
                                      test.k, n));
  }
  if (test.trials < 1) throw ValidationError("substitution test needs at least one trial");

  SubstitutionResult result;
  result.deviations.assign(test.trials, 0.0);
  if (test.k == 0) return result;

  const double reference = averaged_value(family, test.base, context, result.tail_variation);

  std::vector<int> positions(n);
  for (int trial = 0; trial < test.trials; ++trial) {
    ProductFactors changed = test.base;
    if (trial == 0) {
      for (int p = 0; p < test.k; ++p) changed.units[p] = Pair{Complex{1.0}, Complex{0.0}};
    } else {
      std::mt19937_64 rng(test.seed * 1'000'003ULL + static_cast<std::uint64_t>(trial));
      std::iota(positions.begin(), positions.end(), 0);
      for (int p = 0; p < test.k; ++p) {
        std::uniform_int_distribution<int> pick(p, n - 1);
        std::swap(positions[p], positions[pick(rng)]);
        changed.units[positions[p]] = random_factor(rng);
      }
    }
    const double value = averaged_value(family, changed, context, result.tail_variation);
    result.deviations[trial] = std::abs(value - reference);
  }
  result.max_deviation = *std::max_element(result.deviations.begin(), result.deviations.end());
  return result;
}

MacroVerdict is_macroscopic(const ObservableFamily& family, const std::vector<int>& n_list,
                            const MacroTestConfig& config) {
  if (n_list.size() < 3) {
    throw ValidationError(fmt::format(
        "macroscopic test needs at least 3 unit counts, got {}", n_list.size()));
  }
  MacroVerdict verdict;
  verdict.n_list = n_list;
  verdict.macroscopic = true;
  for (int n : n_list) {
    SubstitutionTest test;
    test.base.particle = config.particle;
    test.base.units.assign(n, Pair{Complex{0.0}, Complex{1.0}});
    test.k = config.k;
    test.trials = config.trials;
    test.seed = config.seed;
    const auto result = substitution_invariance(family, test, config.context);
    for (int trial = 0; trial < config.trials; ++trial) {
      verdict.evidence.push_back({n, config.k, trial, result.deviations[trial]});
    }
    const double bound = static_cast<double>(config.k) / n + config.slack;
    verdict.max_deviation.push_back(result.max_deviation);
    verdict.bound.push_back(bound);
    if (result.max_deviation > bound) verdict.macroscopic = false;
  }
  return verdict;
}

}  // namespace pointerlab
