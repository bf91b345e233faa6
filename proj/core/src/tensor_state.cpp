#include "pointerlab/tensor_state.hpp"

#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "pointerlab/error.hpp"

namespace pointerlab {

namespace {

double squared_norm(std::span<const Complex> v) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::norm(z);
  return acc;
}

}  // namespace

int deexcited_count(std::size_t index, int n) {
  const std::size_t units = index & (particle_mask(n) - 1);
  return n - std::popcount(units);
}

void check_unit_count(int n) {
  if (n < 1) throw ValidationError(fmt::format("unit count must be >= 1, got {}", n));
  if (n > kMaxUnits) {
    throw CapacityError(fmt::format(
        "unit count {} exceeds the dense storage cap of {} units", n, kMaxUnits));
  }
}

std::size_t BasisIndex::encode() const {
  const int n = static_cast<int>(unit_bits.size());
  std::size_t index = particle_bit ? particle_mask(n) : 0;
  for (int k = 0; k < n; ++k) {
    if (unit_bits[k]) index |= unit_mask(n, k);
  }
  return index;
}

BasisIndex BasisIndex::decode(std::size_t index, int n) {
  if (index >= dimension(n)) {
    throw ValidationError(fmt::format("basis index {} out of range for n = {}", index, n));
  }
  BasisIndex b;
  b.particle_bit = (index & particle_mask(n)) ? 1 : 0;
  b.unit_bits.resize(n);
  for (int k = 0; k < n; ++k) b.unit_bits[k] = (index & unit_mask(n, k)) ? 1 : 0;
  return b;
}

StateVector StateVector::from_amplitudes(int n, std::vector<Complex> amplitudes,
                                         double norm_tolerance) {
  check_unit_count(n);
  if (amplitudes.size() != dimension(n)) {
    throw DimensionError(fmt::format("expected {} amplitudes for n = {}, got {}",
                                     dimension(n), n, amplitudes.size()));
  }
  const double norm = std::sqrt(squared_norm(amplitudes));
  if (std::abs(norm - 1.0) > norm_tolerance) {
    throw ValidationError(fmt::format("state norm {:.17g} is not 1", norm));
  }
  return StateVector(n, std::move(amplitudes));
}

StateVector StateVector::normalized(int n, std::vector<Complex> amplitudes) {
  check_unit_count(n);
  if (amplitudes.size() != dimension(n)) {
    throw DimensionError(fmt::format("expected {} amplitudes for n = {}, got {}",
                                     dimension(n), n, amplitudes.size()));
  }
  const double norm = std::sqrt(squared_norm(amplitudes));
  if (norm == 0.0) throw ValidationError("cannot normalize the zero vector");
  for (auto& z : amplitudes) z /= norm;
  return StateVector(n, std::move(amplitudes));
}

StateVector StateVector::basis(int n, std::size_t index) {
  check_unit_count(n);
  if (index >= dimension(n)) {
    throw ValidationError(fmt::format("basis index {} out of range for n = {}", index, n));
  }
  std::vector<Complex> amps(dimension(n));
  amps[index] = 1.0;
  return StateVector(n, std::move(amps));
}

double StateVector::norm() const { return std::sqrt(squared_norm(amps_)); }

void ProductFactors::validate() const {
  auto check = [](const Pair& p, int which) {
    const double norm = std::sqrt(std::norm(p[0]) + std::norm(p[1]));
    if (std::abs(norm - 1.0) > 1e-12) {
      throw ValidationError(fmt::format(
          "product factor {} ({}) has norm {:.17g}", which,
          which == 0 ? std::string("particle") : fmt::format("unit {}", which - 1), norm));
    }
  };
  check(particle, 0);
  for (int k = 0; k < size(); ++k) check(units[k], k + 1);
}

double ReducedDensityMatrix::hermiticity_residual() const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double ReducedDensityMatrix::trace() const { return rho_.trace().real(); }

double ReducedDensityMatrix::min_eigenvalue() const {
  // 2x2 Hermitian: (a + d)/2 - sqrt(((a - d)/2)^2 + |b|^2)
  const double a = rho_(0, 0).real();
  const double d = rho_(1, 1).real();
  const double b = std::abs(rho_(0, 1));
  return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
}

ReducedDensityMatrix ReducedDensityMatrix::in_basis(double alpha) const {
  const auto pb = particle_basis(alpha);
  Eigen::Matrix2d r;
  r << pb.psi0[0], pb.psi0[1], pb.psi1[0], pb.psi1[1];
  const Eigen::Matrix2cd rc = r.cast<Complex>();
  return ReducedDensityMatrix(rc * rho_ * rc.transpose());
}

ParticleBasis particle_basis(double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  return ParticleBasis{{c, -s}, {s, c}};
}

double Branches::norm0() const { return std::sqrt(squared_norm(branch0)); }
double Branches::norm1() const { return std::sqrt(squared_norm(branch1)); }

Complex Branches::overlap() const {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < branch0.size(); ++i) acc += std::conj(branch0[i]) * branch1[i];
  return acc;
}

StateVector make_product_state(const ProductFactors& factors) {
  const int n = factors.size();
  check_unit_count(n);
  factors.validate();

  // Build the apparatus product unit by unit; unit 0 ends up most significant.
  std::vector<Complex> app{1.0};
  app.reserve(apparatus_dimension(n));
  for (int k = 0; k < n; ++k) {
    std::vector<Complex> next(app.size() * 2);
    for (std::size_t i = 0; i < app.size(); ++i) {
      next[2 * i] = app[i] * factors.units[k][0];
      next[2 * i + 1] = app[i] * factors.units[k][1];
    }
    app = std::move(next);
  }

  std::vector<Complex> amps(dimension(n));
  const std::size_t half = apparatus_dimension(n);
  for (std::size_t i = 0; i < half; ++i) {
    amps[i] = factors.particle[0] * app[i];
    amps[half + i] = factors.particle[1] * app[i];
  }
  return StateVector::from_amplitudes(n, std::move(amps), 1e-12);
}

Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.units() != b.units()) {
    throw DimensionError(fmt::format("inner product of n = {} and n = {} states",
                                     a.units(), b.units()));
  }
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

ReducedDensityMatrix partial_trace_particle(const StateVector& s) {
  const std::size_t half = apparatus_dimension(s.units());
  Complex r00 = 0.0, r01 = 0.0, r11 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    const Complex a = s[i];
    const Complex b = s[half + i];
    r00 += a * std::conj(a);
    r01 += a * std::conj(b);
    r11 += b * std::conj(b);
  }
  Eigen::Matrix2cd rho;
  rho << Complex(r00.real(), 0.0), r01, std::conj(r01), Complex(r11.real(), 0.0);
  return ReducedDensityMatrix(rho);
}

Branches branch_decompose(const StateVector& s, double alpha) {
  const int n = s.units();
  const std::size_t half = apparatus_dimension(n);
  Branches out;
  out.n = n;
  out.branch0.resize(half);
  out.branch1.resize(half);
  if (alpha == 0.0) {
    std::copy(s.amplitudes().begin(), s.amplitudes().begin() + half, out.branch0.begin());
    std::copy(s.amplitudes().begin() + half, s.amplitudes().end(), out.branch1.begin());
    return out;
  }
  const auto pb = particle_basis(alpha);
  for (std::size_t i = 0; i < half; ++i) {
    out.branch0[i] = pb.psi0[0] * s[i] + pb.psi0[1] * s[half + i];
    out.branch1[i] = pb.psi1[0] * s[i] + pb.psi1[1] * s[half + i];
  }
  return out;
}

std::vector<Complex> recompose(const Branches& branches, double alpha) {
  const std::size_t half = apparatus_dimension(branches.n);
  std::vector<Complex> amps(2 * half);
  const auto pb = particle_basis(alpha);
  for (std::size_t i = 0; i < half; ++i) {
    amps[i] = pb.psi0[0] * branches.branch0[i] + pb.psi1[0] * branches.branch1[i];
    amps[half + i] = pb.psi0[1] * branches.branch0[i] + pb.psi1[1] * branches.branch1[i];
  }
  return amps;
}

}  // namespace pointerlab
