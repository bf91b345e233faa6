#include "pointerlab/scaling_limits.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "pointerlab/error.hpp"
#include "pointerlab/macro_observables.hpp"

namespace pointerlab {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

ModelSpec model_for(const ModelSpec& model, int n, std::uint64_t seed) {
  if (model.kind == CouplingKind::uniform) {
    return ModelSpec::uniform(n, model.g, model.alpha, model.self_energy);
  }
  return ModelSpec::disordered(n, seed, model.g_min, model.g_max, model.alpha,
                               model.self_energy);
}

ScalingRow run_row(const ModelSpec& spec, std::uint64_t seed, Complex c0, Complex c1,
                   const EvolutionConfig& cfg, const ScanOptions& options,
                   const std::vector<double>& times) {
  const auto start = std::chrono::steady_clock::now();
  const PointerObservable pointer(spec.n, options.theta);
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
  const auto series =
      sample_trajectory(h, initial_state(spec, c0, c1), times, observables, cfg);

  ScalingRow row;
  row.n = spec.n;
  row.seed = seed;
  const auto p = time_average(series, "threshold_prob");
  row.p_hat = std::clamp(p.mean, 0.0, 1.0);
  row.abs_error = std::abs(row.p_hat - std::norm(c1));
  row.mixture_distance = row.abs_error;  // two-point total variation
  row.tail_variation = p.tail_variation;
  if (degenerate) {
    row.time_avg_D = std::numeric_limits<double>::quiet_NaN();
  } else {
    const auto d = time_average(series, "overlap_D");
    row.time_avg_D = d.mean;
    row.tail_variation = std::max(row.tail_variation, d.tail_variation);
  }
  row.flagged = row.tail_variation > options.convergence_threshold;
  row.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

ScalingReport scan_n(const ModelSpec& model, const std::vector<int>& n_list, Complex c0,
                     Complex c1, const EvolutionConfig& cfg, const ScanOptions& options) {
  if (n_list.size() < 3) {
    throw ValidationError(fmt::format("scan needs at least 3 unit counts, got {}", n_list.size()));
  }
  if (options.seeds.empty()) throw ValidationError("scan needs at least one seed");
  cfg.validate();

  std::vector<int> ns = n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  struct Task {
    ModelSpec spec;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (int n : ns) {
    for (std::uint64_t seed : options.seeds) tasks.push_back({model_for(model, n, seed), seed});
  }
  const std::vector<double> times =
      options.times.empty() ? uniform_times(options.T, cfg.dt) : options.times;

  std::vector<ScalingRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        rows[i] = run_row(tasks[i].spec, tasks[i].seed, c0, c1, cfg, options, times);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::clamp<int>(options.threads, 1, static_cast<int>(tasks.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ScalingReport report;
  report.rows = std::move(rows);
  report.target = std::norm(c1);
  for (int n : ns) {
    ScalingSummary s;
    s.n = n;
    std::vector<double> d, p, e, m;
    for (const auto& r : report.rows) {
      if (r.n != n || r.flagged) continue;
      d.push_back(r.time_avg_D);
      p.push_back(r.p_hat);
      e.push_back(r.abs_error);
      m.push_back(r.mixture_distance);
    }
    s.used = static_cast<int>(d.size());
    s.time_avg_D = median(d);
    s.p_hat = median(p);
    s.abs_error = median(e);
    s.mixture_distance = median(m);
    report.summary.push_back(s);
  }

  try {
    report.fit = fit_report(report);
  } catch (const ValidationError& e) {
    report.fit_note = e.what();
  }
  return report;
}

DecayFit fit_exponential_decay(const std::vector<std::pair<double, double>>& points) {
  DecayFit fit;
  std::vector<double> x, y;
  for (const auto& [n, value] : points) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      ++fit.excluded;
      continue;
    }
    x.push_back(n);
    y.push_back(std::log(value));
  }
  fit.points = static_cast<int>(x.size());
  if (x.size() < 3) {
    throw ValidationError(fmt::format(
        "exponential fit needs at least 3 positive points, got {}", x.size()));
  }
  const double count = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("exponential fit needs at least two distinct n");
  if (syy == 0.0) {
    fit.rate = 0.0;
    fit.intercept = my;
    fit.r2 = 1.0;
    return fit;
  }
  fit.rate = sxy / sxx;
  fit.intercept = my - fit.rate * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.rate * x[i]);
    ss_res += r * r;
  }
  fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  fit.rate_stderr = x.size() > 2 ? std::sqrt(ss_res / (count - 2.0) / sxx) : 0.0;
  return fit;
}

DecayFit fit_report(const ScalingReport& report) {
  std::vector<std::pair<double, double>> points;
  for (const auto& s : report.summary) {
    if (s.used > 0) points.emplace_back(s.n, s.time_avg_D);
  }
  return fit_exponential_decay(points);
}

LimitEstimate extrapolate_limit(const ScalingReport& report) {
  DecayFit fit;
  try {
    fit = report.fit ? *report.fit : fit_report(report);
  } catch (const ValidationError& e) {
    throw FitRefusal(fmt::format("no usable overlap fit: {}", e.what()));
  }
  if (fit.r2 < kMinimumFitR2) {
    throw FitRefusal(fmt::format("overlap fit r^2 = {:.4f} below {}; refusing to extrapolate",
                                 fit.r2, kMinimumFitR2));
  }
  if (!(fit.rate < 0.0)) {
    throw FitRefusal(fmt::format(
        "overlap does not decay with n (rate {:.4g}); refusing to extrapolate", fit.rate));
  }

  std::vector<const ScalingSummary*> used;
  for (const auto& s : report.summary) {
    if (s.used > 0) used.push_back(&s);
  }
  const ScalingSummary& last = *used.back();

  LimitEstimate out;
  // Log-residual spread widens the band around the fitted tail.
  double rms = 0.0;
  for (const auto* s : used) {
    if (!(s->time_avg_D > 0.0)) continue;
    const double r = std::log(s->time_avg_D) - (fit.intercept + fit.rate * s->n);
    rms += r * r;
  }
  rms = std::sqrt(rms / static_cast<double>(used.size()));
  out.D_inf = 0.0;
  out.D_uncertainty = std::exp(fit.intercept + fit.rate * last.n + 2.0 * rms);

  // Error curve e(n) = p_hat(n) - |c1|^2, extrapolated through an exponential
  // fit of |e(n)|; the uncertainty is the largest linear-space residual.
  std::vector<std::pair<double, double>> err_points;
  for (const auto* s : used) err_points.emplace_back(s->n, std::abs(s->p_hat - report.target));
  const double e_last = last.p_hat - report.target;
  const double sign = e_last < 0.0 ? -1.0 : 1.0;
  double fitted_last = 0.0;
  double max_resid = 0.0;
  try {
    const DecayFit efit = fit_exponential_decay(err_points);
    if (efit.rate < 0.0) {
      fitted_last = std::exp(efit.intercept + efit.rate * last.n);
      for (const auto& [n, e] : err_points) {
        max_resid = std::max(max_resid, std::abs(e - std::exp(efit.intercept + efit.rate * n)));
      }
    } else {
      for (const auto& [n, e] : err_points) max_resid = std::max(max_resid, e);
    }
  } catch (const ValidationError&) {
    for (const auto& [n, e] : err_points) max_resid = std::max(max_resid, e);
  }
  out.p_inf = last.p_hat - sign * fitted_last;
  out.p_uncertainty = max_resid;
  return out;
}

}  // namespace pointerlab
