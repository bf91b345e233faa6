#include "pointerlab/amplifier_model.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "pointerlab/error.hpp"

namespace pointerlab {

std::string to_string(CouplingKind kind) {
  return kind == CouplingKind::uniform ? "uniform" : "disordered";
}

std::vector<double> draw_couplings(int n, std::uint64_t seed, double g_min, double g_max) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n)};
  std::mt19937_64 rng(seq);
  std::vector<double> g(n);
  for (auto& gk : g) {
    // 53-bit uniform on [0, 1); avoids implementation-defined distributions.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    gk = g_min + (g_max - g_min) * u;
  }
  return g;
}

ModelSpec ModelSpec::uniform(int n, double g, double alpha, double self_energy) {
  ModelSpec spec;
  spec.n = n;
  spec.kind = CouplingKind::uniform;
  spec.g = g;
  spec.alpha = alpha;
  spec.self_energy = self_energy;
  spec.couplings.assign(std::max(n, 0), g);
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::disordered(int n, std::uint64_t seed, double g_min, double g_max,
                                double alpha, double self_energy) {
  ModelSpec spec;
  spec.n = n;
  spec.kind = CouplingKind::disordered;
  spec.g_min = g_min;
  spec.g_max = g_max;
  spec.seed = seed;
  spec.alpha = alpha;
  spec.self_energy = self_energy;
  if (!(g_min > 0.0) || !(g_max >= g_min)) {
    throw ValidationError(
        fmt::format("coupling range [{}, {}] must satisfy 0 < g_min <= g_max", g_min, g_max));
  }
  check_unit_count(n);
  spec.couplings = draw_couplings(n, seed, g_min, g_max);
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::with_units(int units) const {
  if (kind == CouplingKind::uniform) return uniform(units, g, alpha, self_energy);
  return disordered(units, seed, g_min, g_max, alpha, self_energy);
}

void ModelSpec::validate() const {
  check_unit_count(n);
  if (static_cast<int>(couplings.size()) != n) {
    throw ValidationError(fmt::format("expected {} couplings, got {}", n, couplings.size()));
  }
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    if (!(couplings[k] > 0.0) || !std::isfinite(couplings[k])) {
      throw ValidationError(fmt::format("coupling g_{} = {} must be positive", k, couplings[k]));
    }
  }
  if (!(alpha >= 0.0 && alpha < std::numbers::pi)) {
    throw ValidationError(fmt::format("basis angle {} outside [0, pi)", alpha));
  }
  if (!std::isfinite(self_energy)) throw ValidationError("self energy must be finite");
}

double ModelSpec::mean_coupling() const {
  return std::accumulate(couplings.begin(), couplings.end(), 0.0) /
         static_cast<double>(couplings.size());
}

std::vector<Complex> Operator::apply(std::span<const Complex> in) const {
  std::vector<Complex> out(in.size());
  apply(in, out);
  return out;
}

Eigen::MatrixXcd Operator::dense() const {
  const int n = units();
  if (n > kMaxDenseUnits) {
    throw CapacityError(fmt::format("dense form limited to n <= {}, got {}", kMaxDenseUnits, n));
  }
  const std::size_t dim = dimension(n);
  Eigen::MatrixXcd m(dim, dim);
  std::vector<Complex> e(dim), col(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < dim; ++i) m(i, j) = col[i];
  }
  return m;
}

HamiltonianOperator::HamiltonianOperator(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  half_couplings_.reserve(spec_.couplings.size());
  for (double g : spec_.couplings) half_couplings_.push_back(0.5 * g);
}

void HamiltonianOperator::apply(std::span<const Complex> in, std::span<Complex> out) const {
  const int n = spec_.n;
  const std::size_t dim = dimension(n);
  const std::size_t half = apparatus_dimension(n);
  if (in.size() != dim || out.size() != dim) {
    throw DimensionError(fmt::format("operator on n = {} applied to vector of size {}", n,
                                     in.size()));
  }
  const double s = std::sin(spec_.alpha);
  const double c = std::cos(spec_.alpha);
  const bool computational = spec_.alpha == 0.0;

  // out <- (I (x) A) in, restricted to the upper half when P1 = diag(0, 1).
  const std::size_t begin = computational ? half : 0;
  std::fill(out.begin(), out.end(), Complex{});
  for (int k = 0; k < n; ++k) {
    const std::size_t m = unit_mask(n, k);
    const double h = half_couplings_[k];
    for (std::size_t base = begin; base < dim; base += 2 * m) {
      for (std::size_t j = base; j < base + m; ++j) {
        out[j] += h * in[j + m];
        out[j + m] += h * in[j];
      }
    }
  }

  if (!computational) {
    // out <- (P1 (x) I) out
    const double ss = s * s, sc = s * c, cc = c * c;
    for (std::size_t i = 0; i < half; ++i) {
      const Complex u0 = out[i];
      const Complex u1 = out[half + i];
      out[i] = ss * u0 + sc * u1;
      out[half + i] = sc * u0 + cc * u1;
    }
  }

  if (spec_.self_energy != 0.0) {
    const double eps = spec_.self_energy;
    for (std::size_t i = 0; i < dim; ++i) {
      const int excited = std::popcount(i & (half - 1));
      out[i] += eps * static_cast<double>(2 * excited - n) * in[i];
    }
  }
}

Eigen::MatrixXd HamiltonianOperator::dense_real() const {
  const int n = spec_.n;
  if (n > kMaxDenseUnits) {
    throw CapacityError(fmt::format("dense form limited to n <= {}, got {}", kMaxDenseUnits, n));
  }
  const std::size_t dim = dimension(n);
  const std::size_t half = apparatus_dimension(n);
  const double s = std::sin(spec_.alpha);
  const double c = std::cos(spec_.alpha);
  const double p1[2][2] = {{s * s, s * c}, {s * c, c * c}};

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t b = 0; b < half; ++b) {
    for (int k = 0; k < n; ++k) {
      const std::size_t bf = b ^ unit_mask(n, k);
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) {
          if (p1[p][q] != 0.0) m(p * half + b, q * half + bf) += p1[p][q] * half_couplings_[k];
        }
      }
    }
    if (spec_.self_energy != 0.0) {
      const double diag = spec_.self_energy * static_cast<double>(2 * std::popcount(b) - n);
      m(b, b) += diag;
      m(half + b, half + b) += diag;
    }
  }
  return m;
}

Eigen::MatrixXd HamiltonianOperator::branch_block(int p) const {
  const int n = spec_.n;
  if (n > kMaxDenseUnits) {
    throw CapacityError(fmt::format("dense form limited to n <= {}, got {}", kMaxDenseUnits, n));
  }
  if (p != 0 && p != 1) throw ValidationError(fmt::format("branch index must be 0 or 1, got {}", p));
  const std::size_t half = apparatus_dimension(n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(half, half);
  for (std::size_t b = 0; b < half; ++b) {
    if (p == 1) {
      for (int k = 0; k < n; ++k) m(b, b ^ unit_mask(n, k)) += half_couplings_[k];
    }
    m(b, b) += spec_.self_energy * static_cast<double>(2 * std::popcount(b) - n);
  }
  return m;
}

Eigen::MatrixXcd HamiltonianOperator::dense() const { return dense_real().cast<Complex>(); }

double HamiltonianOperator::norm_bound() const {
  return std::accumulate(half_couplings_.begin(), half_couplings_.end(), 0.0) +
         std::abs(spec_.self_energy) * spec_.n;
}

StateVector initial_state(const ModelSpec& spec, Complex c0, Complex c1) {
  spec.validate();
  const double total = std::norm(c0) + std::norm(c1);
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError(fmt::format("|c0|^2 + |c1|^2 = {:.17g}, expected 1", total));
  }
  const auto pb = particle_basis(spec.alpha);
  ProductFactors f;
  f.particle = {c0 * pb.psi0[0] + c1 * pb.psi1[0], c0 * pb.psi0[1] + c1 * pb.psi1[1]};
  // Renormalize away the round-off of the rotation so validate() stays strict.
  const double pn = std::sqrt(std::norm(f.particle[0]) + std::norm(f.particle[1]));
  f.particle[0] /= pn;
  f.particle[1] /= pn;
  f.units.assign(spec.n, Pair{Complex{0.0}, Complex{1.0}});
  return make_product_state(f);
}

ProductFactors closed_form_branch(const ModelSpec& spec, double t) {
  spec.validate();
  if (spec.self_energy != 0.0) {
    throw ValidationError("closed-form branch requires zero self energy");
  }
  const auto pb = particle_basis(spec.alpha);
  ProductFactors f;
  f.particle = {Complex{pb.psi1[0]}, Complex{pb.psi1[1]}};
  f.units.reserve(spec.n);
  for (double g : spec.couplings) {
    const double phase = 0.5 * g * t;
    f.units.push_back(Pair{Complex{0.0, -std::sin(phase)}, Complex{std::cos(phase)}});
  }
  return f;
}

}  // namespace pointerlab
