#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pointerlab/commands.hpp"
#include "pointerlab/error.hpp"
#include "pointerlab/manifest.hpp"

namespace pl = pointerlab;

namespace {

struct SharedFlags {
  std::string config;
  std::string out;
  std::string seeds;
  bool allow_unconverged = false;
  int threads = 1;
};

void add_shared(CLI::App& cmd, SharedFlags& f) {
  cmd.add_option("--config", f.config, "Run configuration file")->required();
  cmd.add_option("--out", f.out,
                 fmt::format("Output directory (default: [output] directory, then ${}, then {})",
                             pl::kOutputEnvVar, pl::kFallbackOutputDir));
  cmd.add_option("--seeds", f.seeds, "Seed list overriding [scan] seeds, e.g. 1,2,5-8");
  cmd.add_flag("--allow-unconverged", f.allow_unconverged,
               "Exit 0 even when a time average is flagged unconverged");
  cmd.add_option("--threads", f.threads, "Worker threads for scans")->check(CLI::PositiveNumber);
}

pl::CommandOptions to_options(const SharedFlags& f) {
  pl::CommandOptions o;
  o.config_path = f.config;
  if (!f.out.empty()) o.out_dir = f.out;
  if (!f.seeds.empty()) o.seeds = pl::parse_seed_list(f.seeds);
  o.allow_unconverged = f.allow_unconverged;
  o.threads = f.threads;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pointerlab: particle + population-inverted amplifier simulator"};
  app.set_version_flag("--version", pl::tool_version());
  app.require_subcommand(1);

  SharedFlags sim_flags, scan_flags, check_flags, macro_flags;
  bool timing = false;
  double alpha = 0.0, alpha_prime = 0.0;
  pl::MacroTestOptions macro;

  auto* simulate = app.add_subcommand("simulate", "Sample one trajectory to simulate.csv");
  add_shared(*simulate, sim_flags);

  auto* scan = app.add_subcommand("scan", "Scan over n_list to scan.csv and report.txt");
  add_shared(*scan, scan_flags);
  scan->add_flag("--timing", timing, "Record per-row wall time in scan.csv");

  auto* check = app.add_subcommand("check", "Run the property suite (n <= 12) to check.csv");
  add_shared(*check, check_flags);

  auto* algebra = app.add_subcommand("algebra", "Commutator of two measurement setups");
  algebra->add_option("alpha", alpha, "First basis angle in [0, pi)")->required();
  algebra->add_option("alpha_prime", alpha_prime, "Second basis angle in [0, pi)")->required();

  auto* macro_test = app.add_subcommand("macro-test", "Substitution test over n_list");
  add_shared(*macro_test, macro_flags);
  macro_test->add_option("--family", macro.family, "pointer | single-unit | constant")
      ->check(CLI::IsMember({"pointer", "single-unit", "constant"}));
  macro_test->add_option("--k", macro.k, "Substituted factors per trial");
  macro_test->add_option("--trials", macro.trials, "Trials per unit count");
  macro_test->add_flag("--static", macro.static_only, "Skip the time average");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pl::kExitValidation;
  }

  try {
    if (*simulate) return pl::cmd_simulate(to_options(sim_flags));
    if (*scan) {
      auto o = to_options(scan_flags);
      o.timing = timing;
      return pl::cmd_scan(o);
    }
    if (*check) return pl::cmd_check(to_options(check_flags));
    if (*algebra) return pl::cmd_algebra(alpha, alpha_prime, std::cout);
    if (*macro_test) return pl::cmd_macro_test(to_options(macro_flags), macro);
  } catch (const pl::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pl::kExitValidation;
  } catch (const pl::CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pl::kExitValidation;
  } catch (const pl::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << fmt::format(" (achieved {:.3g})", e.achieved())
              << '\n';
    return pl::kExitUnconverged;
  } catch (const pl::FitRefusal& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pl::kExitFitRefusal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
