#include "pointerlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pointerlab/error.hpp"

namespace pointerlab {

namespace {
// Short Lanczos runs keep orthogonality to round-off; longer ones reorthogonalize.
constexpr int kReorthogonalizeFrom = 20;
}

std::string to_string(EvolutionMethod method) {
  return method == EvolutionMethod::dense_eigen ? "dense" : "krylov";
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0)) throw ValidationError(fmt::format("dt must be positive, got {}", dt));
  if (!(tolerance > 0.0)) {
    throw ValidationError(fmt::format("tolerance must be positive, got {}", tolerance));
  }
  if (krylov_dim < 4) {
    throw ValidationError(fmt::format("krylov_dim must be >= 4, got {}", krylov_dim));
  }
}

Propagator::Propagator(const Operator& hamiltonian, EvolutionConfig cfg)
    : h_(hamiltonian), cfg_(cfg) {
  cfg_.validate();
  if (cfg_.method == EvolutionMethod::dense_eigen) {
    if (h_.units() > kMaxDenseUnits) {
      throw ValidationError(fmt::format("dense_eigen evolution limited to n <= {}, got {}",
                                        kMaxDenseUnits, h_.units()));
    }
    spectrum_ = std::make_shared<DenseSpectrum>(h_);
  }
}

StateVector Propagator::evolve(const StateVector& s, double t) const {
  return advance(s, t, t);
}

StateVector Propagator::advance(const StateVector& s, double t, double horizon) const {
  if (s.units() != h_.units()) {
    throw DimensionError(fmt::format("state with n = {} evolved under operator with n = {}",
                                     s.units(), h_.units()));
  }
  last_error_ = 0.0;
  last_matvecs_ = 0;
  if (t == 0.0) return s;
  std::vector<Complex> out;
  if (spectrum_) {
    out.resize(s.size());
    spectrum_->propagate(s.amplitudes(), out, t);
  } else {
    out = krylov(s.amplitudes(), t, horizon);
  }
  return StateBuilder::adopt(s.units(), std::move(out));
}

// Lanczos. One basis serves every substep
// length tried from the current vector, so shrinking a rejected step costs no
// extra matvecs. The basis stops growing as soon as its error estimate meets
// the budget for the current step.
std::vector<Complex> Propagator::krylov(std::span<const Complex> v0, double t,
                                        double horizon) const {
  const Eigen::Index dim = static_cast<Eigen::Index>(v0.size());
  const int m_max = static_cast<int>(std::min<Eigen::Index>(cfg_.krylov_dim, dim));
  const double sign = t < 0.0 ? -1.0 : 1.0;
  const double budget_scale = cfg_.tolerance / std::max(std::abs(horizon), 1.0);

  Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(v0.data(), dim);
  Eigen::MatrixXcd basis(dim, m_max);
  Eigen::VectorXcd w(dim);
  Eigen::VectorXcd proj(m_max);
  Eigen::VectorXd alpha(m_max), beta(m_max + 1);

  double remaining = std::abs(t);
  double tau = remaining;
  long substeps = 0;

  struct Small {
    Eigen::VectorXd lam;
    Eigen::MatrixXd q;
  };
  auto diagonalize = [&](int m) {
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      tri(j, j) = alpha[j];
      if (j + 1 < m) tri(j, j + 1) = tri(j + 1, j) = beta[j + 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);
    return Small{eig.eigenvalues(), eig.eigenvectors()};
  };
  auto coefficients = [&](const Small& sm, double step) {
    const auto m = sm.lam.size();
    Eigen::VectorXcd c(m);
    for (Eigen::Index k = 0; k < m; ++k) c[k] = std::polar(sm.q(0, k), -sign * sm.lam[k] * step);
    return Eigen::VectorXcd(sm.q.cast<Complex>() * c);
  };
  // The last coefficient can vanish at isolated times (uniform couplings at
  // half periods), so the residual is sampled across the step.
  auto residual = [&](const Small& sm, double b, double step) {
    double worst = 0.0;
    for (double f : {0.25, 0.5, 0.75, 1.0}) {
      worst = std::max(worst, std::abs(coefficients(sm, f * step)[sm.lam.size() - 1]));
    }
    return b * worst;
  };

  while (remaining > 0.0) {
    const double norm0 = v.norm();
    basis.col(0) = v / norm0;
    tau = std::min(tau, remaining);

    int m = m_max;
    bool exact = false;
    for (int j = 0; j < m_max; ++j) {
      h_.apply(std::span<const Complex>(basis.col(j).data(), static_cast<std::size_t>(dim)),
               std::span<Complex>(w.data(), static_cast<std::size_t>(dim)));
      ++last_matvecs_;
      alpha[j] = basis.col(j).dot(w).real();
      w -= alpha[j] * basis.col(j);
      if (j > 0) w -= beta[j] * basis.col(j - 1);
      if (j >= kReorthogonalizeFrom) {
        proj.head(j + 1).noalias() = basis.leftCols(j + 1).adjoint() * w;
        w.noalias() -= basis.leftCols(j + 1) * proj.head(j + 1);
      }
      const double b = w.norm();
      beta[j + 1] = b;
      if (b < 1e-13 * (std::abs(alpha[j]) + 1.0)) {
        m = j + 1;
        exact = true;
        break;
      }
      if (j + 1 < m_max) {
        basis.col(j + 1) = w / b;
        // Early exit once the current step already meets its budget.
        if (j >= 3) {
          if (residual(diagonalize(j + 1), b, tau) <= budget_scale * tau) {
            m = j + 1;
            break;
          }
        }
      }
    }

    const Small sm = diagonalize(m);
    Eigen::VectorXcd y;
    double err = 0.0;
    for (;;) {
      y = coefficients(sm, tau);
      err = exact ? 0.0 : residual(sm, beta[m], tau);
      if (err <= budget_scale * tau) break;
      tau *= 0.5;
      if (tau < std::abs(t) * 1e-12 || tau < 1e-14) {
        throw ConvergenceError(
            fmt::format("Krylov step did not reach tolerance {:.3g}; achieved residual {:.3g}",
                        cfg_.tolerance, err),
            err);
      }
    }

    v.noalias() = basis.leftCols(m) * (norm0 * y);
    last_error_ += err;
    remaining -= tau;
    if (remaining < 1e-15 * std::abs(t)) remaining = 0.0;
    tau *= 2.0;
    if (++substeps > 10'000'000) {
      throw ConvergenceError("Krylov evolution exceeded the substep limit", last_error_);
    }
  }
  return std::vector<Complex>(v.data(), v.data() + dim);
}

StateVector evolve(const Operator& hamiltonian, const StateVector& s, double t,
                   const EvolutionConfig& cfg) {
  return Propagator(hamiltonian, cfg).evolve(s, t);
}

std::size_t TimeSeries::column(std::string_view id) const {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw ValidationError(fmt::format("no observable named '{}'", id));
  return static_cast<std::size_t>(it - ids.begin());
}

void TimeSeries::finalize() {
  const std::size_t n = times.size();
  running_average.assign(values.size(), std::vector<double>(n, 0.0));
  tail_variation.assign(values.size(), 0.0);
  if (n == 0) return;
  const double t0 = times.front();
  const double tail_start = t0 + 0.75 * (times.back() - t0);
  for (std::size_t j = 0; j < values.size(); ++j) {
    const auto& f = values[j];
    auto& avg = running_average[j];
    double integral = 0.0;
    avg[0] = f[0];
    for (std::size_t i = 1; i < n; ++i) {
      integral += 0.5 * (f[i] + f[i - 1]) * (times[i] - times[i - 1]);
      avg[i] = integral / (times[i] - t0);
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      if (times[i] < tail_start) continue;
      lo = std::min(lo, avg[i]);
      hi = std::max(hi, avg[i]);
    }
    tail_variation[j] = hi - lo;
  }
}

std::vector<double> uniform_times(double T, double dt) {
  if (!(dt > 0.0) || !(T >= 0.0)) {
    throw ValidationError(fmt::format("invalid time grid T = {}, dt = {}", T, dt));
  }
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  std::vector<double> times(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) times[i] = static_cast<double>(i) * dt;
  if (steps > 0) times.back() = T;
  return times;
}

TimeSeries sample_trajectory(const Operator& hamiltonian, const StateVector& initial,
                             const std::vector<double>& times,
                             const std::vector<Observable>& observables,
                             const EvolutionConfig& cfg) {
  return sample_trajectory(Propagator(hamiltonian, cfg), initial, times, observables);
}

TimeSeries sample_trajectory(const Propagator& propagator, const StateVector& initial,
                             const std::vector<double>& times,
                             const std::vector<Observable>& observables) {
  if (times.empty()) throw ValidationError("empty sample time list");
  if (times.front() < 0.0) throw ValidationError("sample times must start at t >= 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw ValidationError("sample times must be strictly increasing");
    }
  }

  TimeSeries series;
  series.times = times;
  for (const auto& o : observables) series.ids.push_back(o.id);
  series.values.assign(observables.size(), std::vector<double>(times.size()));

  const double horizon = times.back();
  StateVector state = initial;
  double now = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] != now) {
      state = propagator.advance(state, times[i] - now, horizon);
      now = times[i];
    }
    for (std::size_t j = 0; j < observables.size(); ++j) {
      series.values[j][i] = observables[j].fn(state);
    }
  }
  series.finalize();
  return series;
}

TimeAverage time_average(const TimeSeries& series, std::string_view id,
                         double characteristic_period) {
  if (series.samples() == 0) throw ValidationError("time average of an empty series");
  const std::size_t j = series.column(id);
  TimeAverage out;
  out.mean = series.running_average[j].back();
  out.tail_variation = series.tail_variation[j];
  const double span = series.times.back() - series.times.front();
  out.short_span = characteristic_period > 0.0 && span < 10.0 * characteristic_period;
  return out;
}

double trapezoid_mean(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.empty() || times.size() != values.size()) {
    throw ValidationError("trapezoid_mean needs equal, non-empty samples");
  }
  if (times.size() == 1) return values.front();
  double integral = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    integral += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
  }
  return integral / (times.back() - times.front());
}

}  // namespace pointerlab
