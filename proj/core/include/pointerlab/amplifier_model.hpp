#pragma once

// The amplifier: n two-level units primed in the excited state, coupled to a
// two-state particle through
//
//     H = P1(alpha) (x) sum_k (g_k / 2) X_k  +  eps * I (x) sum_k Z_k
//
// P1(alpha) projects onto the detectable particle state psi1(alpha), X_k
// flips unit k and Z_k is +1 on an excited unit, -1 on a de-excited one.
// With eps = 0 the undetectable branch psi0(alpha) (x) |1...1> is stationary
// and the detectable branch de-excites every unit independently.
// hbar = 1; times are in units of 1/g.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pointerlab/tensor_state.hpp"

namespace pointerlab {

/// Largest unit count for which a dense matrix may be formed (2^13 rows).
inline constexpr int kMaxDenseUnits = 12;

enum class CouplingKind { uniform, disordered };

std::string to_string(CouplingKind kind);

struct ModelSpec {
  int n = 1;
  CouplingKind kind = CouplingKind::uniform;
  std::vector<double> couplings;
  double g = 1.0;  // uniform strength
  double g_min = 0.5;
  double g_max = 1.5;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double self_energy = 0.0;

  static ModelSpec uniform(int n, double g = 1.0, double alpha = 0.0,
                           double self_energy = 0.0);
  /// Couplings drawn uniformly from [g_min, g_max]; the draw depends only on
  /// (seed, n), so every n gets a fresh sample from the same seed stream.
  static ModelSpec disordered(int n, std::uint64_t seed, double g_min = 0.5,
                              double g_max = 1.5, double alpha = 0.0,
                              double self_energy = 0.0);

  /// Same coupling law and seed at a different unit count.
  ModelSpec with_units(int units) const;

  void validate() const;
  double mean_coupling() const;
  /// 1 / mean coupling: the natural time unit of the model.
  double characteristic_time() const { return 1.0 / mean_coupling(); }
};

std::vector<double> draw_couplings(int n, std::uint64_t seed, double g_min, double g_max);

/// Matrix-free linear map on joint states.
class Operator {
 public:
  virtual ~Operator() = default;

  virtual int units() const = 0;
  virtual void apply(std::span<const Complex> in, std::span<Complex> out) const = 0;
  /// True when the matrix is real in the computational basis.
  virtual bool is_real() const { return false; }

  std::vector<Complex> apply(std::span<const Complex> in) const;
  /// Built column by column from apply(); limited to kMaxDenseUnits.
  virtual Eigen::MatrixXcd dense() const;
};

class HamiltonianOperator final : public Operator {
 public:
  explicit HamiltonianOperator(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  int units() const override { return spec_.n; }
  void apply(std::span<const Complex> in, std::span<Complex> out) const override;
  using Operator::apply;
  bool is_real() const override { return true; }
  Eigen::MatrixXcd dense() const override;
  Eigen::MatrixXd dense_real() const;
  /// Apparatus block of H for the particle in psi0 (p = 0) or psi1 (p = 1).
  Eigen::MatrixXd branch_block(int p) const;
  /// Upper bound on the spectral radius.
  double norm_bound() const;

 private:
  ModelSpec spec_;
  std::vector<double> half_couplings_;
};

inline HamiltonianOperator build_hamiltonian(const ModelSpec& spec) {
  return HamiltonianOperator(spec);
}

/// Particle in c0 psi0(alpha) + c1 psi1(alpha), every unit excited.
StateVector initial_state(const ModelSpec& spec, Complex c0, Complex c1);

/// Analytic evolution of the detectable branch psi1(alpha) (x) |1...1>:
/// unit k carries (-i sin(g_k t / 2), cos(g_k t / 2)). Requires eps = 0.
ProductFactors closed_form_branch(const ModelSpec& spec, double t);

}  // namespace pointerlab
