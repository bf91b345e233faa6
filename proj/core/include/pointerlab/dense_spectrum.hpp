#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pointerlab/amplifier_model.hpp"

namespace pointerlab {

/// Full eigendecomposition H = V diag(w) V^dagger of a dense Hermitian
/// operator. Real symmetric operators keep real eigenvectors. The amplifier
/// Hamiltonian is split into its two particle branches first.
class DenseSpectrum {
 public:
  explicit DenseSpectrum(const Operator& op);

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  bool is_real() const { return real_; }

  /// out = exp(-i H t) in
  void propagate(std::span<const Complex> in, std::span<Complex> out, double t) const;

 private:
  struct Branch {
    Eigen::Vector2d particle;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd vectors;  // empty when the block is already diagonal
  };

  void propagate_branches(std::span<const Complex> in, std::span<Complex> out, double t) const;

  std::vector<Branch> branches_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd real_vectors_;
  Eigen::MatrixXcd complex_vectors_;
  bool real_ = true;
};

}  // namespace pointerlab
