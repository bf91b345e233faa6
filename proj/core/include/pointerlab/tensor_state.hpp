#pragma once

// Joint particle / amplifier states.
//
// Basis layout, shared by every module: a basis state of the particle and n
// amplifier units is the integer
//
//     index = (particle_bit << n) | sum_k unit_bit[k] << (n - 1 - k)
//
// so the particle bit is the most significant bit and unit 0 sits right below
// it. unit_bit = 1 means the unit is excited, 0 means de-excited. The
// dimension is 2^(n+1).

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pointerlab {

using Complex = std::complex<double>;
/// Amplitudes on (|0>, |1>) of a single two-level factor.
using Pair = std::array<Complex, 2>;

/// Dense storage cap on the unit count: 2^25 amplitudes.
inline constexpr int kMaxUnits = 24;

inline constexpr std::size_t dimension(int n) { return std::size_t{1} << (n + 1); }
inline constexpr std::size_t apparatus_dimension(int n) { return std::size_t{1} << n; }
inline constexpr std::size_t particle_mask(int n) { return std::size_t{1} << n; }
inline constexpr std::size_t unit_mask(int n, int k) { return std::size_t{1} << (n - 1 - k); }

/// Number of de-excited units in a basis index.
int deexcited_count(std::size_t index, int n);

/// Throws CapacityError unless 1 <= n <= kMaxUnits.
void check_unit_count(int n);

struct BasisIndex {
  int particle_bit = 0;
  std::vector<std::uint8_t> unit_bits;

  std::size_t encode() const;
  static BasisIndex decode(std::size_t index, int n);
  bool operator==(const BasisIndex&) const = default;
};

class StateVector {
 public:
  /// Wraps amplitudes; throws ValidationError when the norm differs from 1
  /// by more than `norm_tolerance`.
  static StateVector from_amplitudes(int n, std::vector<Complex> amplitudes,
                                     double norm_tolerance = 1e-10);
  /// Rescales to unit norm. Rejects the zero vector.
  static StateVector normalized(int n, std::vector<Complex> amplitudes);
  static StateVector basis(int n, std::size_t index);

  int units() const { return n_; }
  std::size_t size() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }
  double norm() const;

 private:
  StateVector(int n, std::vector<Complex> amps) : n_(n), amps_(std::move(amps)) {}

  int n_ = 0;
  std::vector<Complex> amps_;

  friend class StateBuilder;
};

/// Trusted construction path for integrators that already guarantee the norm
/// to their own tolerance; no check is performed.
class StateBuilder {
 public:
  static StateVector adopt(int n, std::vector<Complex> amplitudes) {
    return StateVector(n, std::move(amplitudes));
  }
};

struct ProductFactors {
  Pair particle;
  std::vector<Pair> units;

  int size() const { return static_cast<int>(units.size()); }
  /// Throws ValidationError naming the first factor whose norm is off by
  /// more than 1e-12 (factor 0 is the particle, factor k+1 is unit k).
  void validate() const;
};

class ReducedDensityMatrix {
 public:
  explicit ReducedDensityMatrix(const Eigen::Matrix2cd& entries) : rho_(entries) {}

  const Eigen::Matrix2cd& entries() const { return rho_; }
  Complex operator()(int i, int j) const { return rho_(i, j); }
  double hermiticity_residual() const;
  double trace() const;
  double min_eigenvalue() const;
  /// Same operator expressed in the particle basis {psi0(alpha), psi1(alpha)}.
  ReducedDensityMatrix in_basis(double alpha) const;

 private:
  Eigen::Matrix2cd rho_;
};

/// Components of the measured particle basis on the computational (psi0, psi1)
/// pair: psi1(alpha) = cos(alpha) psi1 + sin(alpha) psi0, psi0(alpha) its
/// orthogonal complement.
struct ParticleBasis {
  std::array<double, 2> psi0;
  std::array<double, 2> psi1;
};
ParticleBasis particle_basis(double alpha);

/// Apparatus-side vectors of the decomposition s = psi0 (x) branch0 + psi1 (x) branch1.
struct Branches {
  int n = 0;
  std::vector<Complex> branch0;
  std::vector<Complex> branch1;

  double norm0() const;
  double norm1() const;
  /// <branch0|branch1>
  Complex overlap() const;
};

StateVector make_product_state(const ProductFactors& factors);
/// Conjugate-linear in the first argument.
Complex inner_product(const StateVector& a, const StateVector& b);
ReducedDensityMatrix partial_trace_particle(const StateVector& s);
/// Branch vectors relative to the measured basis at `alpha` (0: computational).
Branches branch_decompose(const StateVector& s, double alpha = 0.0);
/// Inverse of branch_decompose; returns raw amplitudes.
std::vector<Complex> recompose(const Branches& branches, double alpha = 0.0);

}  // namespace pointerlab
