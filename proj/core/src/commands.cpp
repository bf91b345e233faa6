#include "pointerlab/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <numbers>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pointerlab/born_probability.hpp"
#include "pointerlab/error.hpp"
#include "pointerlab/macro_observables.hpp"
#include "pointerlab/manifest.hpp"
#include "pointerlab/property_suite.hpp"
#include "pointerlab/scaling_limits.hpp"

namespace pointerlab {

namespace fs = std::filesystem;

namespace {

std::ostream& log_stream(const CommandOptions& options) {
  return options.log ? *options.log : std::cerr;
}

// Shortest round-trip form; NaN becomes the given marker.
std::string num(double x, const char* missing = "NA") {
  if (std::isnan(x)) return missing;
  return fmt::format("{}", x);
}

RunManifest start_manifest(const std::string& command, const RunConfig& config) {
  RunManifest m;
  m.command = command;
  m.tool_version = tool_version();
  m.config_echo = to_text(config);
  m.seeds = config.seeds;
  m.started = utc_timestamp();
  return m;
}

double normalized_overlap(const Branches& b) {
  return std::min(std::abs(b.overlap()) / (b.norm0() * b.norm1()), 1.0);
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  auto parse_one = [&](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw ValidationError(fmt::format("bad seed '{}' in --seeds", s));
    }
    return v;
  };
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      seeds.push_back(parse_one(item));
      continue;
    }
    const std::uint64_t lo = parse_one(item.substr(0, dash));
    const std::uint64_t hi = parse_one(item.substr(dash + 1));
    if (hi < lo || hi - lo > 100000) {
      throw ValidationError(fmt::format("bad seed range '{}' in --seeds", item));
    }
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ValidationError("--seeds must list at least one seed");
  return seeds;
}

fs::path resolve_output_dir(const CommandOptions& options, const RunConfig& config) {
  if (options.out_dir && !options.out_dir->empty()) return *options.out_dir;
  if (!config.output.directory.empty()) return config.output.directory;
  if (const char* env = std::getenv(kOutputEnvVar); env && *env) return env;
  return kFallbackOutputDir;
}

RunConfig effective_config(const CommandOptions& options) {
  if (options.config_path.empty()) throw ValidationError("--config is required");
  RunConfig config = load_run_config(options.config_path);
  if (options.seeds) config.seeds = *options.seeds;
  if (options.threads < 1) {
    throw ValidationError(fmt::format("--threads must be >= 1, got {}", options.threads));
  }
  return config;
}

int cmd_simulate(const CommandOptions& options) {
  const RunConfig config = effective_config(options);
  auto& log = log_stream(options);
  RunManifest manifest = start_manifest("simulate", config);

  const ModelSpec spec = config.model_spec(config.single_n(), config.seeds.front());
  const HamiltonianOperator h(spec);
  const Propagator prop(h, config.evolution);
  const PointerObservable pointer(spec.n, config.theta);
  const bool degenerate = config.c0 == 0.0 || config.c1 == 0.0;
  const double alpha = spec.alpha;

  std::vector<Observable> observables{
      {"pointer_expectation", [&](const StateVector& s) { return pointer.expectation(s); }},
      {"threshold_prob", [&](const StateVector& s) { return pointer.threshold_probability(s); }},
      {"rho01_abs",
       [alpha](const StateVector& s) { return std::abs(branch_decompose(s, alpha).overlap()); }},
      {"overlap_D",
       [alpha, degenerate](const StateVector& s) {
         if (degenerate) return std::numeric_limits<double>::quiet_NaN();
         return normalized_overlap(branch_decompose(s, alpha));
       }},
      {"norm_error", [](const StateVector& s) { return std::abs(s.norm() - 1.0); }},
  };
  const auto series = sample_trajectory(prop, initial_state(spec, config.c0, config.c1),
                                        uniform_times(config.T, config.evolution.dt),
                                        observables);

  std::string csv = "t,pointer_expectation,threshold_prob,rho01_abs,overlap_D,norm_error\n";
  std::string dat = "# t pointer_expectation threshold_prob rho01_abs overlap_D norm_error\n";
  for (std::size_t i = 0; i < series.samples(); ++i) {
    csv += num(series.times[i]);
    dat += num(series.times[i]);
    for (std::size_t j = 0; j < series.ids.size(); ++j) {
      csv += ',' + num(series.values[j][i]);
      dat += ' ' + num(series.values[j][i], "NaN");
    }
    csv += '\n';
    dat += '\n';
  }

  const fs::path dir = resolve_output_dir(options, config);
  OutputSet out(dir);
  out.add("simulate.csv", std::move(csv));
  if (config.wants_format("gnuplot")) out.add("simulate.dat", std::move(dat));
  out.commit(std::move(manifest));

  const auto p = time_average(series, "threshold_prob", spec.characteristic_time());
  fmt::print(log, "time-averaged threshold_prob = {:.6f} (target {:.6f}, tail variation {:.3g})\n",
             p.mean, std::norm(config.c1), p.tail_variation);
  if (p.short_span) {
    fmt::print(log, "warning: T spans fewer than ten characteristic periods\n");
  }
  fmt::print(log, "wrote {}\n", dir.string());
  if (p.tail_variation > kConvergenceThreshold) {
    fmt::print(log, "time average not converged: tail variation {:.3g} > {}\n",
               p.tail_variation, kConvergenceThreshold);
    if (!options.allow_unconverged) return kExitUnconverged;
  }
  return kExitSuccess;
}

int cmd_scan(const CommandOptions& options) {
  const RunConfig config = effective_config(options);
  auto& log = log_stream(options);
  if (config.model.n_list.empty()) throw ValidationError("[model] n_list is required for scan");
  RunManifest manifest = start_manifest("scan", config);

  ScanOptions scan;
  scan.theta = config.theta;
  scan.T = config.T;
  scan.seeds = config.seeds;
  scan.threads = options.threads;
  scan.convergence_threshold = kConvergenceThreshold;
  const ModelSpec model = config.model_spec(config.model.n_list.front(), config.seeds.front());
  const ScalingReport report =
      scan_n(model, config.model.n_list, config.c0, config.c1, config.evolution, scan);

  std::string csv =
      "n,seed,time_avg_D,p_hat,abs_error,mixture_distance,tail_variation,wall_time_s\n";
  for (const auto& r : report.rows) {
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", r.n, r.seed, num(r.time_avg_D), num(r.p_hat),
                       num(r.abs_error), num(r.mixture_distance), num(r.tail_variation),
                       options.timing ? num(r.wall_time_s) : std::string("NA"));
  }

  std::string text;
  text += "# pointerlab scan report\n";
  text += "# The exponential decay law in n is a model-specific ansatz: the overlap is a\n";
  text += "# product of independent per-unit factors. It is not a derived convergence rate.\n";
  text += fmt::format("target |c1|^2 = {}\ntheta = {}\nT = {}\nseeds = {}\n\n", report.target,
                      config.theta, config.T, config.seeds.size());
  text += "n  used  median_time_avg_D  median_p_hat  median_abs_error  median_mixture_distance\n";
  for (const auto& s : report.summary) {
    text += fmt::format("{:<3}{:<6}{:<19.6g}{:<14.6g}{:<18.6g}{:.6g}\n", s.n, s.used,
                        s.time_avg_D, s.p_hat, s.abs_error, s.mixture_distance);
  }
  int flagged = 0;
  for (const auto& r : report.rows) {
    if (r.flagged) {
      ++flagged;
      text += fmt::format("flagged: n = {} seed = {} tail variation {:.3g}\n", r.n, r.seed,
                          r.tail_variation);
    }
  }
  text += '\n';
  bool refused = false;
  if (report.fit) {
    const auto& f = *report.fit;
    text += fmt::format(
        "overlap fit: log D = {:.6g} + ({:.6g} +/- {:.2g}) n, r^2 = {:.6f}, points = {}, "
        "excluded = {}\n",
        f.intercept, f.rate, f.rate_stderr, f.r2, f.points, f.excluded);
    text += fmt::format("reference rate ln(2/pi) = {:.6f}\n", std::log(2.0 / std::numbers::pi));
  } else {
    text += fmt::format("overlap fit unavailable: {}\n", report.fit_note);
  }
  try {
    const LimitEstimate lim = extrapolate_limit(report);
    text += fmt::format("D_inf = {:.3g} +/- {:.3g}\n", lim.D_inf, lim.D_uncertainty);
    text += fmt::format("p_inf = {:.6f} +/- {:.3g}\n", lim.p_inf, lim.p_uncertainty);
  } catch (const FitRefusal& e) {
    refused = true;
    text += fmt::format("extrapolation refused: {}\n", e.what());
  }
  if (options.timing) {
    text += "\nwall time per row (s):\n";
    for (const auto& r : report.rows) {
      text += fmt::format("n = {} seed = {}: {:.3f}\n", r.n, r.seed, r.wall_time_s);
    }
  }

  const fs::path dir = resolve_output_dir(options, config);
  OutputSet out(dir);
  out.add("scan.csv", std::move(csv));
  out.add("report.txt", text);
  out.commit(std::move(manifest));

  fmt::print(log, "{}", text);
  fmt::print(log, "wrote {}\n", dir.string());
  if (flagged > 0 && !options.allow_unconverged) {
    fmt::print(log, "{} row(s) unconverged\n", flagged);
    return kExitUnconverged;
  }
  return refused ? kExitFitRefusal : kExitSuccess;
}

int cmd_check(const CommandOptions& options, const Operator* hamiltonian) {
  const RunConfig config = effective_config(options);
  auto& log = log_stream(options);
  const int n = config.single_n();
  if (n > kMaxDenseUnits) {
    throw ValidationError(
        fmt::format("check runs dense cross-checks and needs n <= {}, got {}", kMaxDenseUnits, n));
  }
  RunManifest manifest = start_manifest("check", config);
  const ModelSpec spec = config.model_spec(n, config.seeds.front());
  const HamiltonianOperator built(spec);
  PropertyOptions popts;
  popts.seed = config.seeds.front();
  const auto results =
      run_property_suite(hamiltonian ? *hamiltonian : built, spec, config.evolution, popts);

  std::string csv = "property,status,residual,tolerance,detail\n";
  for (const auto& r : results) {
    // Details never contain commas or quotes; keep the column unquoted.
    std::string detail = r.detail;
    for (auto& ch : detail) {
      if (ch == ',') ch = ';';
    }
    csv += fmt::format("{},{},{:.3e},{:.0e},{}\n", r.name, to_string(r.status), r.residual,
                       r.tolerance, detail);
    fmt::print(log, "{:<24}{:<9}residual {:.3e}  tolerance {:.0e}  {}\n", r.name,
               to_string(r.status), r.residual, r.tolerance, r.detail);
  }
  const fs::path dir = resolve_output_dir(options, config);
  OutputSet out(dir);
  out.add("check.csv", std::move(csv));
  out.commit(std::move(manifest));
  return all_passed(results) ? kExitSuccess : kExitPropertyFailure;
}

int cmd_algebra(double alpha, double alpha_prime, std::ostream& out) {
  for (double a : {alpha, alpha_prime}) {
    if (!(a >= 0.0 && a < std::numbers::pi)) {
      throw ValidationError(fmt::format("basis angle {} outside [0, pi)", a));
    }
  }
  const double norm = setup_commutator(alpha, alpha_prime);
  const double delta = alpha_prime - alpha;
  const double expected = std::abs(std::sin(delta) * std::cos(delta));
  const bool compatible = norm <= 1e-10;
  fmt::print(out, "alpha = {}\nalpha' = {}\n", alpha, alpha_prime);
  fmt::print(out, "||[P1(alpha), P1(alpha')]|| = {:.12g}\n", norm);
  fmt::print(out, "|sin(d) cos(d)|            = {:.12g}\n", expected);
  fmt::print(out, "verdict: {}\n", compatible ? "compatible" : "incompatible");
  return kExitSuccess;
}

int cmd_macro_test(const CommandOptions& options, const MacroTestOptions& macro) {
  const RunConfig config = effective_config(options);
  auto& log = log_stream(options);
  if (config.model.n_list.empty()) {
    throw ValidationError("[model] n_list is required for macro-test");
  }
  ObservableFamily family;
  if (macro.family == "pointer") {
    family = pointer_family();
  } else if (macro.family == "single-unit") {
    family = single_unit_family();
  } else if (macro.family == "constant") {
    family = constant_family(0.5);
  } else {
    throw ValidationError(fmt::format(
        "unknown family '{}' (expected pointer, single-unit or constant)", macro.family));
  }
  RunManifest manifest = start_manifest("macro-test", config);

  MacroTestConfig mc;
  mc.k = macro.k;
  mc.trials = macro.trials;
  mc.seed = config.seeds.front();
  // Config amplitudes live in the measured basis; the product sequence wants
  // computational components.
  const auto pb = particle_basis(config.model.alpha);
  mc.particle = {config.c0 * pb.psi0[0] + config.c1 * pb.psi1[0],
                 config.c0 * pb.psi0[1] + config.c1 * pb.psi1[1]};
  const double pn = std::sqrt(std::norm(mc.particle[0]) + std::norm(mc.particle[1]));
  mc.particle[0] /= pn;
  mc.particle[1] /= pn;
  mc.context.model = config.model_spec(config.model.n_list.front(), config.seeds.front());
  mc.context.cfg = config.evolution;
  mc.context.T = macro.static_only ? 0.0 : config.T;

  const MacroVerdict verdict = is_macroscopic(family, config.model.n_list, mc);

  std::string csv = "n,k,trial,deviation\n";
  for (const auto& e : verdict.evidence) {
    csv += fmt::format("{},{},{},{}\n", e.n, e.k, e.trial, num(e.deviation));
  }
  const fs::path dir = resolve_output_dir(options, config);
  OutputSet out(dir);
  out.add("macro_evidence.csv", std::move(csv));
  out.commit(std::move(manifest));

  for (std::size_t i = 0; i < verdict.n_list.size(); ++i) {
    fmt::print(log, "n = {:<3} max deviation {:.6f}  bound {:.6f}\n", verdict.n_list[i],
               verdict.max_deviation[i], verdict.bound[i]);
  }
  fmt::print(log, "family {}: {}\n", family.name,
             verdict.macroscopic ? "macroscopic" : "not macroscopic");
  return verdict.macroscopic ? kExitSuccess : kExitPropertyFailure;
}

}  // namespace pointerlab
