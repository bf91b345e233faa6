#include "pointerlab/born_probability.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pointerlab/error.hpp"
#include "pointerlab/macro_observables.hpp"

namespace pointerlab {

namespace {

void check_amplitudes(Complex c0, Complex c1) {
  const double total = std::norm(c0) + std::norm(c1);
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError(fmt::format("|c0|^2 + |c1|^2 = {:.17g}, expected 1", total));
  }
}

}  // namespace

DecoherenceSeries decoherence_series(const ModelSpec& spec, Complex c0, Complex c1,
                                     const std::vector<double>& times,
                                     const EvolutionConfig& cfg) {
  check_amplitudes(c0, c1);
  const bool degenerate = c0 == 0.0 || c1 == 0.0;
  const HamiltonianOperator h(spec);
  const Propagator propagator(h, cfg);

  // Borrow TimeSeries for the running average of D.
  TimeSeries ts;
  ts.times = times;
  ts.ids = {"overlap_D"};
  ts.values.assign(1, std::vector<double>(times.size()));

  DecoherenceSeries out;
  out.times = times;
  out.rho01_abs.resize(times.size());
  out.branch_norm0.resize(times.size());
  out.branch_norm1.resize(times.size());
  if (!degenerate) out.overlap.resize(times.size());

  StateVector state = initial_state(spec, c0, c1);
  double now = 0.0;
  const double horizon = times.empty() ? 0.0 : times.back();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ValidationError("sample times must be strictly increasing");
    }
    if (times[i] != now) {
      state = propagator.advance(state, times[i] - now, horizon);
      now = times[i];
    }
    const Branches b = branch_decompose(state, spec.alpha);
    out.branch_norm0[i] = b.norm0();
    out.branch_norm1[i] = b.norm1();
    if (degenerate) {
      out.rho01_abs[i] = 0.0;
      continue;
    }
    const double rho01 = std::abs(b.overlap());
    out.rho01_abs[i] = rho01;
    const double d = rho01 / (out.branch_norm0[i] * out.branch_norm1[i]);
    out.overlap[i] = std::min(d, 1.0);
    ts.values[0][i] = out.overlap[i];
  }
  if (!degenerate && !times.empty()) {
    ts.finalize();
    out.time_avg_D = ts.running_average[0].back();
    out.tail_variation = ts.tail_variation[0];
  }
  return out;
}

BornEstimate born_estimate(const ModelSpec& spec, Complex c0, Complex c1, double theta,
                           double T, const EvolutionConfig& cfg) {
  check_amplitudes(c0, c1);
  spec.validate();
  const double min_span = 50.0 * spec.characteristic_time();
  if (T < min_span) {
    throw ValidationError(fmt::format(
        "averaging window T = {} shorter than 50 characteristic times ({})", T, min_span));
  }
  const PointerObservable pointer(spec.n, theta);
  const bool degenerate = c0 == 0.0 || c1 == 0.0;
  const double alpha = spec.alpha;

  std::vector<Observable> observables{
      {"threshold_prob", [&](const StateVector& s) { return pointer.threshold_probability(s); }},
  };
  if (!degenerate) {
    observables.push_back({"overlap_D", [alpha](const StateVector& s) {
                             const Branches b = branch_decompose(s, alpha);
                             return std::min(
                                 std::abs(b.overlap()) / (b.norm0() * b.norm1()), 1.0);
                           }});
  }

  const HamiltonianOperator h(spec);
  const auto series = sample_trajectory(h, initial_state(spec, c0, c1),
                                        uniform_times(T, cfg.dt), observables, cfg);
  const auto avg = time_average(series, "threshold_prob", spec.characteristic_time());

  BornEstimate est;
  est.p_hat = std::clamp(avg.mean, 0.0, 1.0);
  est.target = std::norm(c1);
  est.abs_error = std::abs(est.p_hat - est.target);
  est.n = spec.n;
  est.T = T;
  est.theta = theta;
  est.tail_variation = avg.tail_variation;
  est.time_avg_D = degenerate ? std::numeric_limits<double>::quiet_NaN()
                              : time_average(series, "overlap_D").mean;
  est.converged = est.tail_variation <= kConvergenceThreshold;
  return est;
}

double mixture_distance(const BornEstimate& estimate) {
  const double p = estimate.p_hat;
  const double q = estimate.target;
  return 0.5 * (std::abs(p - q) + std::abs((1.0 - p) - (1.0 - q)));
}

double mixture_distance(const ModelSpec& spec, Complex c0, Complex c1, double theta, double T,
                        const EvolutionConfig& cfg) {
  return mixture_distance(born_estimate(spec, c0, c1, theta, T, cfg));
}

PointerAlgebra::PointerAlgebra(const Eigen::Matrix2cd& generator) : generator_(generator) {
  if ((generator - generator.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("pointer algebra generator must be self-adjoint");
  }
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  basis_.push_back(id);
  const Complex half_trace = 0.5 * generator.trace();
  if ((generator - half_trace * id).cwiseAbs().maxCoeff() > 1e-12) basis_.push_back(generator);
}

bool PointerAlgebra::contains(const Eigen::Matrix2cd& m, double tol) const {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd fit;
  if (basis_.size() == 1) {
    fit = 0.5 * m.trace() * id;
  } else {
    const Eigen::Matrix2cd g0 = generator_ - 0.5 * generator_.trace() * id;
    const Complex b = (g0.adjoint() * m).trace() / (g0.adjoint() * g0).trace();
    const Complex a = 0.5 * (m.trace() - b * generator_.trace());
    fit = a * id + b * generator_;
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - fit).cwiseAbs().maxCoeff() <= tol * scale;
}

double PointerAlgebra::max_commutator() const {
  std::vector<Eigen::Matrix2cd> elems = basis_;
  elems.push_back(generator_);
  elems.push_back(generator_ * generator_);
  double worst = 0.0;
  for (const auto& x : elems) {
    for (const auto& y : elems) {
      worst = std::max(worst, (x * y - y * x).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

PointerAlgebra pointer_algebra(const Eigen::Matrix2cd& generator) {
  return PointerAlgebra(generator);
}

Eigen::Matrix2d detection_projector(double alpha) {
  const auto pb = particle_basis(alpha);
  Eigen::Vector2d v(pb.psi1[0], pb.psi1[1]);
  return v * v.transpose();
}

double operator_norm(const Eigen::Matrix2cd& m) {
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m);
  return svd.singularValues()[0];
}

double setup_commutator(double alpha, double alpha_prime) {
  const Eigen::Matrix2d p = detection_projector(alpha);
  const Eigen::Matrix2d q = detection_projector(alpha_prime);
  const Eigen::Matrix2d c = p * q - q * p;
  return operator_norm(c.cast<Complex>());
}

}  // namespace pointerlab
