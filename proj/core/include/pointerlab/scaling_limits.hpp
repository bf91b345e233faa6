#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pointerlab/amplifier_model.hpp"
#include "pointerlab/dynamics.hpp"

namespace pointerlab {

struct ScalingRow {
  int n = 0;
  std::uint64_t seed = 0;
  double time_avg_D = 0.0;
  double p_hat = 0.0;
  double abs_error = 0.0;
  double mixture_distance = 0.0;
  double tail_variation = 0.0;
  double wall_time_s = 0.0;
  bool flagged = false;
};

/// Per-n medians over seeds.
struct ScalingSummary {
  int n = 0;
  double time_avg_D = 0.0;
  double p_hat = 0.0;
  double abs_error = 0.0;
  double mixture_distance = 0.0;
  int used = 0;  // unflagged rows that entered the medians
};

struct DecayFit {
  double rate = 0.0;       // d log(value) / dn
  double intercept = 0.0;  // log(value) at n = 0
  double r2 = 0.0;
  double rate_stderr = 0.0;
  int points = 0;
  int excluded = 0;  // nonpositive values dropped
};

struct LimitEstimate {
  double D_inf = 0.0;
  double D_uncertainty = 0.0;
  double p_inf = 0.0;
  double p_uncertainty = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;  // sorted by (n, seed)
  std::vector<ScalingSummary> summary;
  std::optional<DecayFit> fit;
  double target = 0.0;  // |c1|^2
  std::string fit_note;
};

struct ScanOptions {
  double theta = 0.25;
  double T = 200.0;
  std::vector<std::uint64_t> seeds{1};
  int threads = 1;
  /// Tail variation above this flags a row as unconverged.
  double convergence_threshold = 0.01;
  /// Optional explicit sample times; defaults to uniform_times(T, cfg.dt).
  std::vector<double> times;
};

/// One trajectory per (n, seed); the coupling law of `model` is redrawn for
/// every n from each seed. Rows are computed in parallel but assembled in
/// canonical order, so output does not depend on the thread count.
ScalingReport scan_n(const ModelSpec& model, const std::vector<int>& n_list, Complex c0,
                     Complex c1, const EvolutionConfig& cfg, const ScanOptions& options);

/// Least squares of log(value) against n. Nonpositive values are dropped;
/// fewer than three usable points throws ValidationError. All-equal values
/// give rate 0 and r^2 = 1.
DecayFit fit_exponential_decay(const std::vector<std::pair<double, double>>& points);

/// Fits the median time-averaged overlap of a report (unflagged rows only).
DecayFit fit_report(const ScalingReport& report);

/// Throws FitRefusal unless the overlap decays (rate < 0) with r^2 >= 0.9.
LimitEstimate extrapolate_limit(const ScalingReport& report);

inline constexpr double kMinimumFitR2 = 0.9;

}  // namespace pointerlab
