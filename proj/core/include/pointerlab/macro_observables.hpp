#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "pointerlab/amplifier_model.hpp"
#include "pointerlab/dynamics.hpp"
#include "pointerlab/tensor_state.hpp"

namespace pointerlab {

/// Default detection threshold on the de-excited fraction. It separates the
/// undetectable branch (pointer at 0) from the detectable one, whose pointer
/// concentrates around 1/2 under disordered couplings.
inline constexpr double kDefaultThreshold = 0.25;

/// Fraction of de-excited units, m / n, diagonal in the computational basis,
/// together with the spectral projector onto m / n >= theta.
class PointerObservable {
 public:
  explicit PointerObservable(int n, double theta = kDefaultThreshold);

  int units() const { return n_; }
  double theta() const { return theta_; }
  /// Smallest de-excited count m with m / n >= theta.
  int threshold_count() const { return min_count_; }

  double weight(std::size_t index) const;
  bool detected(std::size_t index) const;
  /// {0, 1/n, ..., 1}
  std::vector<double> eigenvalues() const;
  /// Diagonal of the threshold projector (entries 0 or 1).
  std::vector<double> projector_diagonal() const;

  double expectation(const StateVector& s) const;
  double threshold_probability(const StateVector& s) const;

 private:
  int n_;
  double theta_;
  int min_count_;
};

/// Expected de-excited fraction, in [0, 1].
double pointer_expectation(const StateVector& s);
/// <s| Pi_theta |s>; theta must lie in (0, 1).
double threshold_probability(const StateVector& s, double theta);
/// Probability that unit k is de-excited.
double unit_deexcitation(const StateVector& s, int k);

/// A sequence f_n of observables; the unit count is read off the state.
struct ObservableFamily {
  std::string name;
  std::function<double(const StateVector&)> eval;
};

ObservableFamily pointer_family();
/// De-excitation of the first unit alone: not macroscopic.
ObservableFamily single_unit_family();
ObservableFamily constant_family(double value);

struct SubstitutionTest {
  ProductFactors base;
  int k = 1;
  int trials = 8;
  std::uint64_t seed = 1;
};

/// How f is averaged: T = 0 evaluates f on the product state itself,
/// otherwise f is time-averaged along the trajectory on [0, T].
struct DynamicsContext {
  ModelSpec model = ModelSpec::uniform(1);
  EvolutionConfig cfg;
  double T = 0.0;
};

struct SubstitutionResult {
  double max_deviation = 0.0;
  std::vector<double> deviations;  // one per trial
  double tail_variation = 0.0;     // worst over all averaged trajectories
};

/// Replaces k unit factors of the base sequence and measures how far the
/// (time-averaged) value of f moves. Trial 0 de-excites the first k units;
/// later trials substitute random positions with random unit-norm factors.
SubstitutionResult substitution_invariance(const ObservableFamily& family,
                                           const SubstitutionTest& test,
                                           const DynamicsContext& context);

struct MacroTestConfig {
  int k = 1;
  int trials = 8;
  std::uint64_t seed = 1;
  /// Base particle amplitudes in the computational basis.
  Pair particle{Complex{1.0 / std::numbers::sqrt2}, Complex{1.0 / std::numbers::sqrt2}};
  DynamicsContext context;
  /// Allowance for time-average convergence on top of k / n.
  double slack = 0.01;
};

struct EvidenceRow {
  int n;
  int k;
  int trial;
  double deviation;
};

struct MacroVerdict {
  bool macroscopic = false;
  std::vector<EvidenceRow> evidence;
  std::vector<int> n_list;
  std::vector<double> max_deviation;  // per n
  std::vector<double> bound;          // k / n + slack, per n
};

/// Passes iff every n keeps its worst substitution deviation under the
/// k / n + slack schedule. Needs at least three unit counts.
MacroVerdict is_macroscopic(const ObservableFamily& family, const std::vector<int>& n_list,
                            const MacroTestConfig& config);

}  // namespace pointerlab
