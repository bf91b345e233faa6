#pragma once

// Run configuration: a plain-text file of [section] headers and key = value
// lines. '#' starts a comment. Unknown sections, unknown keys and repeated
// keys are errors. Grammar and defaults:
//
//   [model]
//   kind       = amplifier                 (only value)
//   n          = 10                        (simulate, check)
//   n_list     = 6, 8, 10, 12              (scan, macro-test)
//   coupling   = disordered | uniform      (default disordered)
//   g          = 1.0                       (uniform strength)
//   g_min      = 0.5
//   g_max      = 1.5
//   alpha      = 0                         (measured basis angle, [0, pi))
//   epsilon    = 0                         (self energy)
//
//   [amplitudes]                           (required)
//   c0         = re, im
//   c1         = re, im                    (components may be written [-]sqrt(x))
//
//   [evolution]
//   method     = krylov | dense            (default krylov)
//   dt         = 0.5
//   T          = 200
//   tolerance  = 1e-9
//   krylov_dim = 16
//
//   [pointer]
//   theta      = 0.25
//
//   [scan]
//   seeds      = 1, 2, 3                   (default 1)
//
//   [output]
//   directory  = out
//   formats    = csv, gnuplot              (default csv)

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pointerlab/amplifier_model.hpp"
#include "pointerlab/dynamics.hpp"

namespace pointerlab {

struct RunConfig {
  struct Model {
    std::string kind = "amplifier";
    std::optional<int> n;
    std::vector<int> n_list;
    CouplingKind coupling = CouplingKind::disordered;
    double g = 1.0;
    double g_min = 0.5;
    double g_max = 1.5;
    double alpha = 0.0;
    double epsilon = 0.0;
    bool operator==(const Model&) const = default;
  };
  struct Output {
    std::string directory;
    std::vector<std::string> formats{"csv"};
    bool operator==(const Output&) const = default;
  };

  Model model;
  Complex c0{1.0};
  Complex c1{0.0};
  EvolutionConfig evolution;
  double T = 200.0;
  double theta = 0.25;
  std::vector<std::uint64_t> seeds{1};
  Output output;

  bool operator==(const RunConfig&) const = default;

  /// Model at unit count n with the coupling draw of `seed`.
  ModelSpec model_spec(int n, std::uint64_t seed) const;
  /// Single-n commands: model.n, or throws ValidationError.
  int single_n() const;
  bool wants_format(std::string_view format) const;
};

/// Throws ValidationError with "<source>:<line>: ..." diagnostics.
RunConfig parse_run_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_run_config(const std::string& path);
/// Canonical text form; parse_run_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);

}  // namespace pointerlab
