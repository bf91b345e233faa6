#include <algorithm>
#include <cmath>
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "pointerlab/dense_spectrum.hpp"

#include <fmt/format.h>

#include "pointerlab/error.hpp"

namespace pointerlab {

namespace {

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    throw ConvergenceError(fmt::format("{} failed with info = {}", routine, info),
                           static_cast<double>(info));
  }
}

void symmetric_eigen(Eigen::MatrixXd a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const lapack_int dim = static_cast<lapack_int>(a.rows());
  values.resize(dim);
  vectors.resize(dim, dim);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(dim));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', dim, a.data(), dim, 0.0,
                                         0.0, 0, 0, 0.0, &found, values.data(), vectors.data(),
                                         dim, support.data());
  check_info(info, "dsyevr");
}

bool is_diagonal(const Eigen::MatrixXd& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

DenseSpectrum::DenseSpectrum(const Operator& op) {
  if (op.units() > kMaxDenseUnits) {
    throw ValidationError(fmt::format("dense eigendecomposition limited to n <= {}, got {}",
                                      kMaxDenseUnits, op.units()));
  }
  const auto* hamiltonian = dynamic_cast<const HamiltonianOperator*>(&op);
  real_ = op.is_real();

  if (hamiltonian) {
    // H = |psi0><psi0| (x) B0 + |psi1><psi1| (x) B1 in the rotated particle basis.
    const double alpha = hamiltonian->spec().alpha;
    const double s = std::sin(alpha);
    const double c = std::cos(alpha);
    const Eigen::Vector2d particle[2] = {{c, -s}, {s, c}};
    eigenvalues_.resize(0);
    for (int p = 0; p < 2; ++p) {
      Branch br;
      br.particle = particle[p];
      Eigen::MatrixXd block = hamiltonian->branch_block(p);
      if (is_diagonal(block)) {
        br.eigenvalues = block.diagonal();
      } else {
        symmetric_eigen(std::move(block), br.eigenvalues, br.vectors);
      }
      Eigen::VectorXd all(eigenvalues_.size() + br.eigenvalues.size());
      all << eigenvalues_, br.eigenvalues;
      eigenvalues_ = std::move(all);
      branches_.push_back(std::move(br));
    }
    return;
  }

  if (real_) {
    symmetric_eigen(op.dense().real(), eigenvalues_, real_vectors_);
    return;
  }

  Eigen::MatrixXcd a = op.dense();
  const lapack_int dim = static_cast<lapack_int>(a.rows());
  eigenvalues_.resize(dim);
  complex_vectors_.resize(dim, dim);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(dim));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', dim, a.data(), dim,
                                         0.0, 0.0, 0, 0, 0.0, &found, eigenvalues_.data(),
                                         complex_vectors_.data(), dim, support.data());
  check_info(info, "zheevr");
}

void DenseSpectrum::propagate(std::span<const Complex> in, std::span<Complex> out,
                              double t) const {
  const Eigen::Index dim = eigenvalues_.size();
  if (static_cast<Eigen::Index>(in.size()) != dim || static_cast<Eigen::Index>(out.size()) != dim) {
    throw DimensionError("dense propagation on a vector of the wrong size");
  }
  if (!branches_.empty()) {
    propagate_branches(in, out, t);
    return;
  }
  Eigen::Map<const Eigen::VectorXcd> v(in.data(), dim);
  Eigen::Map<Eigen::VectorXcd> w(out.data(), dim);
  Eigen::VectorXcd phases(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    phases[k] = std::polar(1.0, -eigenvalues_[k] * t);
  }

  if (real_) {
    // Real eigenvectors: rotate real and imaginary parts separately.
    const Eigen::VectorXd re = v.real();
    const Eigen::VectorXd im = v.imag();
    const Eigen::VectorXd cre = real_vectors_.transpose() * re;
    const Eigen::VectorXd cim = real_vectors_.transpose() * im;
    Eigen::VectorXcd c(dim);
    for (Eigen::Index k = 0; k < dim; ++k) c[k] = Complex(cre[k], cim[k]) * phases[k];
    const Eigen::VectorXd ore = real_vectors_ * c.real();
    const Eigen::VectorXd oim = real_vectors_ * c.imag();
    for (Eigen::Index k = 0; k < dim; ++k) w[k] = Complex(ore[k], oim[k]);
    return;
  }
  const Eigen::VectorXcd c = complex_vectors_.adjoint() * v;
  w = complex_vectors_ * phases.cwiseProduct(c);
}

void DenseSpectrum::propagate_branches(std::span<const Complex> in, std::span<Complex> out,
                                       double t) const {
  const std::size_t half = in.size() / 2;
  std::fill(out.begin(), out.end(), Complex{});
  Eigen::VectorXcd a(half);
  for (const auto& br : branches_) {
    for (std::size_t b = 0; b < half; ++b) {
      a[b] = br.particle[0] * in[b] + br.particle[1] * in[half + b];
    }
    const Eigen::Index m = br.eigenvalues.size();
    Eigen::VectorXcd phases(m);
    for (Eigen::Index k = 0; k < m; ++k) phases[k] = std::polar(1.0, -br.eigenvalues[k] * t);
    if (br.vectors.size() == 0) {
      a = a.cwiseProduct(phases);
    } else {
      const Eigen::VectorXd cre = br.vectors.transpose() * a.real();
      const Eigen::VectorXd cim = br.vectors.transpose() * a.imag();
      const Eigen::VectorXcd coeff =
          (cre.cast<Complex>() + Complex(0.0, 1.0) * cim.cast<Complex>()).cwiseProduct(phases);
      const Eigen::VectorXd ore = br.vectors * coeff.real();
      const Eigen::VectorXd oim = br.vectors * coeff.imag();
      a = ore.cast<Complex>() + Complex(0.0, 1.0) * oim.cast<Complex>();
    }
    for (std::size_t b = 0; b < half; ++b) {
      out[b] += br.particle[0] * a[b];
      out[half + b] += br.particle[1] * a[b];
    }
  }
}

}  // namespace pointerlab
