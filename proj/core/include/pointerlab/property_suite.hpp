#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pointerlab/amplifier_model.hpp"
#include "pointerlab/dynamics.hpp"

namespace pointerlab {

enum class PropertyStatus { pass, fail, skipped };

std::string to_string(PropertyStatus status);

struct PropertyResult {
  std::string name;
  PropertyStatus status = PropertyStatus::pass;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct PropertyOptions {
  std::uint64_t seed = 1;
  /// Random vectors for the Hermiticity pairing.
  int random_vectors = 20;
  /// Sample times spread over the oracle window [0, 50].
  int oracle_samples = 26;
  /// Longest evolution time for unitarity and reversibility.
  double long_time = 200.0;
  /// Random substitution trials beyond the exhaustive range.
  int substitution_trials = 1000;
};

/// Runs every property against `hamiltonian` (normally built from `spec`; a
/// different operator can be passed to exercise the failure paths). Dense
/// cross-checks require n <= kMaxDenseUnits.
std::vector<PropertyResult> run_property_suite(const Operator& hamiltonian,
                                               const ModelSpec& spec,
                                               const EvolutionConfig& cfg,
                                               const PropertyOptions& options = {});

bool all_passed(const std::vector<PropertyResult>& results);

/// Worst |f(v) - f(v')| - k/n of the pointer over every pair of basis product
/// sequences v, v' of n units (k = number of differing factors).
double exhaustive_pointer_excess(int n);

/// Same bound on random product sequences with k random substitutions,
/// k drawn from 1..n-1. Returns the worst excess.
double random_pointer_excess(int n, int trials, std::uint64_t seed);

}  // namespace pointerlab
