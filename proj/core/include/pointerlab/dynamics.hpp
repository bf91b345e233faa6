#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pointerlab/amplifier_model.hpp"
#include "pointerlab/dense_spectrum.hpp"
#include "pointerlab/tensor_state.hpp"

namespace pointerlab {

enum class EvolutionMethod { dense_eigen, iterative_krylov };

std::string to_string(EvolutionMethod method);

struct EvolutionConfig {
  EvolutionMethod method = EvolutionMethod::iterative_krylov;
  int krylov_dim = 16;
  double dt = 0.5;
  double tolerance = 1e-9;

  void validate() const;
  bool operator==(const EvolutionConfig&) const = default;
};

/// exp(-i H t) for a fixed operator. The dense method diagonalizes once at
/// construction; the Krylov method runs adaptive Lanczos substeps whose
/// a-posteriori error estimates sum to at most `tolerance` over a horizon.
class Propagator {
 public:
  Propagator(const Operator& hamiltonian, EvolutionConfig cfg);

  const EvolutionConfig& config() const { return cfg_; }

  StateVector evolve(const StateVector& s, double t) const;
  /// Advance by `t` while budgeting error for a longer run of length `horizon`.
  StateVector advance(const StateVector& s, double t, double horizon) const;

  /// Sum of error estimates and matvec count of the most recent call.
  double last_error_estimate() const { return last_error_; }
  long last_matvecs() const { return last_matvecs_; }

 private:
  std::vector<Complex> krylov(std::span<const Complex> v, double t, double horizon) const;

  const Operator& h_;
  EvolutionConfig cfg_;
  std::shared_ptr<const DenseSpectrum> spectrum_;
  mutable double last_error_ = 0.0;
  mutable long last_matvecs_ = 0;
};

StateVector evolve(const Operator& hamiltonian, const StateVector& s, double t,
                   const EvolutionConfig& cfg);

struct Observable {
  std::string id;
  std::function<double(const StateVector&)> fn;
};

/// Sampled observables along one trajectory. values[j][i] is observable j at
/// times[i]; running_average[j][i] is its trapezoidal average over
/// [times[0], times[i]].
struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> running_average;
  /// Per observable: spread of the running average over the last quarter of
  /// the time span.
  std::vector<double> tail_variation;

  std::size_t column(std::string_view id) const;
  std::size_t samples() const { return times.size(); }
  /// Recomputes running averages and tail variations from values.
  void finalize();
};

/// 0, dt, 2 dt, ... up to and including T (the last point is snapped to T).
std::vector<double> uniform_times(double T, double dt);

TimeSeries sample_trajectory(const Operator& hamiltonian, const StateVector& initial,
                             const std::vector<double>& times,
                             const std::vector<Observable>& observables,
                             const EvolutionConfig& cfg);

/// Same, reusing an existing propagator (keeps a dense spectrum alive).
TimeSeries sample_trajectory(const Propagator& propagator, const StateVector& initial,
                             const std::vector<double>& times,
                             const std::vector<Observable>& observables);

struct TimeAverage {
  double mean = 0.0;
  double tail_variation = 0.0;
  /// Span shorter than ten characteristic periods.
  bool short_span = false;
};

TimeAverage time_average(const TimeSeries& series, std::string_view id,
                         double characteristic_period = 0.0);

/// Trapezoidal mean of samples over [times.front(), times.back()].
double trapezoid_mean(const std::vector<double>& times, const std::vector<double>& values);

}  // namespace pointerlab
