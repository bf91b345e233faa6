#include "pointerlab/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pointerlab/error.hpp"

namespace pointerlab {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    parts.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

class LineError {
 public:
  LineError(std::string_view source, int line) : source_(source), line_(line) {}
  [[noreturn]] void fail(const std::string& message) const {
    throw ValidationError(fmt::format("{}:{}: {}", source_, line_, message));
  }

 private:
  std::string_view source_;
  int line_;
};

double parse_number(std::string_view text, const LineError& where) {
  std::string_view body = trim(text);
  bool root = false;
  double sign = 1.0;
  if (body.starts_with("-sqrt(")) {
    sign = -1.0;
    body.remove_prefix(1);
  }
  if (body.starts_with("sqrt(") && body.ends_with(")")) {
    root = true;
    body = trim(body.substr(5, body.size() - 6));
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size() || body.empty()) {
    where.fail(fmt::format("'{}' is not a number", text));
  }
  if (root) {
    if (value < 0.0) where.fail(fmt::format("sqrt of negative value in '{}'", text));
    value = sign * std::sqrt(value);
  }
  if (!std::isfinite(value)) where.fail(fmt::format("'{}' is not finite", text));
  return value;
}

template <typename Int>
Int parse_integer(std::string_view text, const LineError& where) {
  const std::string_view body = trim(text);
  Int value{};
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size() || body.empty()) {
    where.fail(fmt::format("'{}' is not an integer", text));
  }
  return value;
}

Complex parse_complex(std::string_view text, const LineError& where) {
  const auto parts = split_list(text);
  if (parts.size() != 2) where.fail(fmt::format("expected 're, im', got '{}'", text));
  return {parse_number(parts[0], where), parse_number(parts[1], where)};
}

const std::map<std::string, std::set<std::string>, std::less<>>& schema() {
  static const std::map<std::string, std::set<std::string>, std::less<>> keys{
      {"model", {"kind", "n", "n_list", "coupling", "g", "g_min", "g_max", "alpha", "epsilon"}},
      {"amplitudes", {"c0", "c1"}},
      {"evolution", {"method", "dt", "T", "tolerance", "krylov_dim"}},
      {"pointer", {"theta"}},
      {"scan", {"seeds"}},
      {"output", {"directory", "formats"}},
  };
  return keys;
}

void validate(const RunConfig& c, std::string_view source) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError(fmt::format("{}: {}", source, msg));
  };
  if (!c.model.n && c.model.n_list.empty()) fail("[model] needs n or n_list");
  auto check_n = [&](int n) {
    if (n < 1 || n > kMaxUnits) fail(fmt::format("unit count {} outside [1, {}]", n, kMaxUnits));
  };
  if (c.model.n) check_n(*c.model.n);
  for (int n : c.model.n_list) check_n(n);
  if (!(c.model.g > 0.0)) fail("[model] g must be positive");
  if (!(c.model.g_min > 0.0) || !(c.model.g_max >= c.model.g_min)) {
    fail("[model] coupling range must satisfy 0 < g_min <= g_max");
  }
  if (!(c.model.alpha >= 0.0 && c.model.alpha < std::numbers::pi)) fail("[model] alpha outside [0, pi)");
  const double total = std::norm(c.c0) + std::norm(c.c1);
  if (std::abs(total - 1.0) > 1e-12) {
    fail(fmt::format(
        "[amplitudes] |c0|^2 + |c1|^2 = {:.17g}; must be 1 within 1e-12 (use sqrt(x) for exact "
        "components)",
        total));
  }
  try {
    c.evolution.validate();
  } catch (const ValidationError& e) {
    fail(fmt::format("[evolution] {}", e.what()));
  }
  if (!(c.T > 0.0)) fail("[evolution] T must be positive");
  if (!(c.theta > 0.0 && c.theta < 1.0)) fail("[pointer] theta outside (0, 1)");
  if (c.seeds.empty()) fail("[scan] seeds must not be empty");
  for (const auto& f : c.output.formats) {
    if (f != "csv" && f != "gnuplot") fail(fmt::format("[output] unknown format '{}'", f));
  }
}

std::string join_ints(const auto& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt::format("{}", values[i]);
  }
  return out;
}

}  // namespace

ModelSpec RunConfig::model_spec(int n, std::uint64_t seed) const {
  if (model.coupling == CouplingKind::uniform) {
    return ModelSpec::uniform(n, model.g, model.alpha, model.epsilon);
  }
  return ModelSpec::disordered(n, seed, model.g_min, model.g_max, model.alpha, model.epsilon);
}

int RunConfig::single_n() const {
  if (!model.n) throw ValidationError("[model] n is required for this command");
  return *model.n;
}

bool RunConfig::wants_format(std::string_view format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  RunConfig c;
  std::string section;
  std::set<std::string> seen;
  bool have_c0 = false, have_c1 = false;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const LineError where(source, line_no);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') where.fail(fmt::format("malformed section header '{}'", line));
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!schema().contains(section)) where.fail(fmt::format("unknown section [{}]", section));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) where.fail(fmt::format("expected 'key = value', got '{}'", line));
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) where.fail(fmt::format("key '{}' outside of any section", key));
    if (!schema().find(section)->second.contains(key)) {
      where.fail(fmt::format("unknown key '{}' in [{}]", key, section));
    }
    if (!seen.insert(section + "." + key).second) {
      where.fail(fmt::format("duplicate key '{}' in [{}]", key, section));
    }
    if (value.empty()) where.fail(fmt::format("empty value for '{}'", key));

    if (section == "model") {
      if (key == "kind") {
        if (value != "amplifier") where.fail(fmt::format("unknown model kind '{}'", value));
        c.model.kind = std::string(value);
      } else if (key == "n") {
        c.model.n = parse_integer<int>(value, where);
      } else if (key == "n_list") {
        for (auto item : split_list(value)) c.model.n_list.push_back(parse_integer<int>(item, where));
      } else if (key == "coupling") {
        if (value == "uniform") {
          c.model.coupling = CouplingKind::uniform;
        } else if (value == "disordered") {
          c.model.coupling = CouplingKind::disordered;
        } else {
          where.fail(fmt::format("coupling must be uniform or disordered, got '{}'", value));
        }
      } else if (key == "g") {
        c.model.g = parse_number(value, where);
      } else if (key == "g_min") {
        c.model.g_min = parse_number(value, where);
      } else if (key == "g_max") {
        c.model.g_max = parse_number(value, where);
      } else if (key == "alpha") {
        c.model.alpha = parse_number(value, where);
      } else if (key == "epsilon") {
        c.model.epsilon = parse_number(value, where);
      }
    } else if (section == "amplitudes") {
      if (key == "c0") {
        c.c0 = parse_complex(value, where);
        have_c0 = true;
      } else {
        c.c1 = parse_complex(value, where);
        have_c1 = true;
      }
    } else if (section == "evolution") {
      if (key == "method") {
        if (value == "krylov") {
          c.evolution.method = EvolutionMethod::iterative_krylov;
        } else if (value == "dense") {
          c.evolution.method = EvolutionMethod::dense_eigen;
        } else {
          where.fail(fmt::format("method must be krylov or dense, got '{}'", value));
        }
      } else if (key == "dt") {
        c.evolution.dt = parse_number(value, where);
      } else if (key == "T") {
        c.T = parse_number(value, where);
      } else if (key == "tolerance") {
        c.evolution.tolerance = parse_number(value, where);
      } else if (key == "krylov_dim") {
        c.evolution.krylov_dim = parse_integer<int>(value, where);
      }
    } else if (section == "pointer") {
      c.theta = parse_number(value, where);
    } else if (section == "scan") {
      c.seeds.clear();
      for (auto item : split_list(value)) c.seeds.push_back(parse_integer<std::uint64_t>(item, where));
    } else if (section == "output") {
      if (key == "directory") {
        c.output.directory = std::string(value);
      } else {
        c.output.formats.clear();
        for (auto item : split_list(value)) c.output.formats.emplace_back(item);
      }
    }
  }
  if (!have_c0 || !have_c1) {
    throw ValidationError(fmt::format("{}: [amplitudes] c0 and c1 are required", source));
  }
  validate(c, source);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

std::string to_text(const RunConfig& c) {
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  out += "[model]\n";
  line("kind", c.model.kind);
  if (c.model.n) line("n", fmt::format("{}", *c.model.n));
  if (!c.model.n_list.empty()) line("n_list", join_ints(c.model.n_list));
  line("coupling", to_string(c.model.coupling));
  line("g", fmt::format("{}", c.model.g));
  line("g_min", fmt::format("{}", c.model.g_min));
  line("g_max", fmt::format("{}", c.model.g_max));
  line("alpha", fmt::format("{}", c.model.alpha));
  line("epsilon", fmt::format("{}", c.model.epsilon));
  out += "\n[amplitudes]\n";
  line("c0", fmt::format("{}, {}", c.c0.real(), c.c0.imag()));
  line("c1", fmt::format("{}, {}", c.c1.real(), c.c1.imag()));
  out += "\n[evolution]\n";
  line("method", to_string(c.evolution.method));
  line("dt", fmt::format("{}", c.evolution.dt));
  line("T", fmt::format("{}", c.T));
  line("tolerance", fmt::format("{}", c.evolution.tolerance));
  line("krylov_dim", fmt::format("{}", c.evolution.krylov_dim));
  out += "\n[pointer]\n";
  line("theta", fmt::format("{}", c.theta));
  out += "\n[scan]\n";
  line("seeds", join_ints(c.seeds));
  out += "\n[output]\n";
  if (!c.output.directory.empty()) line("directory", c.output.directory);
  std::string formats;
  for (std::size_t i = 0; i < c.output.formats.size(); ++i) {
    formats += (i ? ", " : "") + c.output.formats[i];
  }
  line("formats", formats);
  return out;
}

}  // namespace pointerlab
