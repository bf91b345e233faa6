#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pointerlab/amplifier_model.hpp"
#include "pointerlab/dynamics.hpp"

namespace pointerlab {

/// Time averages whose tail variation exceeds this are flagged unconverged.
inline constexpr double kConvergenceThreshold = 0.01;

struct DecoherenceSeries {
  std::vector<double> times;
  /// |rho_01(t)| in the measured particle basis.
  std::vector<double> rho01_abs;
  /// Normalized branch overlap |<A0|A1>| / (|A0| |A1|); empty when a branch
  /// amplitude vanishes and the overlap direction is undefined.
  std::vector<double> overlap;
  std::vector<double> branch_norm0;
  std::vector<double> branch_norm1;
  std::optional<double> time_avg_D;
  double tail_variation = 0.0;

  bool degenerate() const { return overlap.empty(); }
};

DecoherenceSeries decoherence_series(const ModelSpec& spec, Complex c0, Complex c1,
                                     const std::vector<double>& times,
                                     const EvolutionConfig& cfg);

struct BornEstimate {
  double p_hat = 0.0;
  double target = 0.0;
  double abs_error = 0.0;
  int n = 0;
  double T = 0.0;
  double theta = 0.0;
  double tail_variation = 0.0;
  /// Time-averaged branch overlap on the same trajectory (NaN if degenerate).
  double time_avg_D = 0.0;
  bool converged = true;
};

/// Joint estimate from one trajectory sampled every cfg.dt on [0, T].
/// Requires T >= 50 characteristic times (1 / mean coupling).
BornEstimate born_estimate(const ModelSpec& spec, Complex c0, Complex c1, double theta,
                           double T, const EvolutionConfig& cfg);

/// Total-variation distance between the time-averaged two-outcome pointer
/// distribution and the target mixture (|c1|^2, |c0|^2).
double mixture_distance(const BornEstimate& estimate);
double mixture_distance(const ModelSpec& spec, Complex c0, Complex c1, double theta,
                        double T, const EvolutionConfig& cfg);

/// Commutative algebra {a I + b G} generated by one self-adjoint 2x2 matrix.
class PointerAlgebra {
 public:
  explicit PointerAlgebra(const Eigen::Matrix2cd& generator);

  const Eigen::Matrix2cd& generator() const { return generator_; }
  /// {I} when the generator is a multiple of the identity, {I, G} otherwise.
  const std::vector<Eigen::Matrix2cd>& basis() const { return basis_; }
  int dimension() const { return static_cast<int>(basis_.size()); }
  bool contains(const Eigen::Matrix2cd& m, double tol = 1e-12) const;
  /// Largest entry of any commutator among I, G, G^2 and the basis.
  double max_commutator() const;

 private:
  Eigen::Matrix2cd generator_;
  std::vector<Eigen::Matrix2cd> basis_;
};

PointerAlgebra pointer_algebra(const Eigen::Matrix2cd& generator);

/// Projector onto psi1(alpha) in the computational particle basis.
Eigen::Matrix2d detection_projector(double alpha);

/// Spectral norm of [P1(alpha), P1(alpha')], computed numerically.
double setup_commutator(double alpha, double alpha_prime);

/// Spectral norm of a 2x2 matrix.
double operator_norm(const Eigen::Matrix2cd& m);

}  // namespace pointerlab
