#ifndef CHESHIRE_CONFIG_HPP
#define CHESHIRE_CONFIG_HPP

// Flat `key = value` experiment configuration. `#` starts a comment. List
// values are comma separated. Angles accept `pi`, `pi/M`, `K*pi` and
// `K*pi/M` besides plain numbers.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cheshire/experiments.hpp"

namespace cheshire {

enum class ExperimentKind {
  Evolve,
  WeakValue,
  Homodyne,
  PerturbScan,
  MonteCarlo,
  Pointer,
  ProjectorProfile,
};

enum class OutputFormat { Csv, Json };

inline constexpr std::string_view kToolName = "cheshire";
inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Evolve: return "evolve";
    case ExperimentKind::WeakValue: return "weak-value";
    case ExperimentKind::Homodyne: return "homodyne";
    case ExperimentKind::PerturbScan: return "perturb-scan";
    case ExperimentKind::MonteCarlo: return "montecarlo";
    case ExperimentKind::Pointer: return "pointer";
    case ExperimentKind::ProjectorProfile: return "projector-profile";
  }
  return "";
}

inline std::optional<ExperimentKind> parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::Evolve, ExperimentKind::WeakValue,
                 ExperimentKind::Homodyne, ExperimentKind::PerturbScan,
                 ExperimentKind::MonteCarlo, ExperimentKind::Pointer,
                 ExperimentKind::ProjectorProfile}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Evolve;
  int N = 10;
  bool mirror = true;

  // evolve
  std::string input = "H";  // H, V, D or A
  std::optional<std::uint64_t> steps;

  // perturbation experiment
  std::vector<double> delta{0.0};
  std::string mu_policy = "fixed";  // fixed, tuned (mu c = tan d), tan (mu = tan d)
  double mu = 1.0;
  std::optional<std::uint64_t> shots;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  // weak values and pointer
  std::vector<double> beta{0.0};
  double alpha = std::numbers::pi / 4;
  double a = 0.01;
  double w0 = 1.0;
  std::optional<double> grid_extent;
  std::optional<std::uint64_t> grid_samples;
  bool h_polariser = false;

  // projector profile; empty means the default set
  std::vector<int> cycles;
  std::vector<double> y;

  std::string output;  // empty: stdout
  OutputFormat format = OutputFormat::Csv;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> messages)
      : std::runtime_error(join(messages)), messages_(std::move(messages)) {}

  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  static std::string join(const std::vector<std::string>& m) {
    std::string out = "invalid configuration";
    for (const auto& s : m) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> messages_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_plain_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Number, or an expression K*pi/M with optional K and M.
inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string_view::npos) return parse_plain_double(s);

  double factor = 1.0;
  std::string_view head = trim(s.substr(0, pi_pos));
  if (!head.empty()) {
    if (head.back() != '*') return std::nullopt;
    head = trim(head.substr(0, head.size() - 1));
    const auto k = parse_plain_double(head);
    if (!k) return std::nullopt;
    factor = *k;
  }
  std::string_view tail = trim(s.substr(pi_pos + 2));
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') return std::nullopt;
    const auto m = parse_plain_double(trim(tail.substr(1)));
    if (!m || *m == 0.0) return std::nullopt;
    divisor = *m;
  }
  return factor * std::numbers::pi / divisor;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
  s = trim(s);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  return std::nullopt;
}

/// Shortest representation that parses back to the same double.
inline std::string exact_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline const std::set<std::string, std::less<>>& known_config_keys() {
  static const std::set<std::string, std::less<>> keys{
      "kind",   "N",           "mirror",       "input",       "steps",
      "delta",  "mu_policy",   "mu",           "shots",       "seed",
      "workers", "beta",       "alpha",        "a",           "w0",
      "grid_extent", "grid_samples", "h_polariser", "n",       "y",
      "output", "format"};
  return keys;
}

/// Parse and validate. Collects every problem before throwing ConfigError.
inline ExperimentConfig parse_config(std::string_view text) {
  std::vector<std::string> errors;
  std::map<std::string, std::string, std::less<>> values;

  std::size_t line_no = 0;
  for (std::string_view line : detail::split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("line " + std::to_string(line_no) +
                       ": expected `key = value`");
      continue;
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (!known_config_keys().contains(key)) {
      errors.push_back("unknown key `" + key + "`");
      continue;
    }
    values[key] = value;  // later lines override earlier ones
  }

  ExperimentConfig cfg;
  auto bad = [&](std::string_view key, std::string_view why) {
    errors.push_back(std::string(key) + ": " + std::string(why));
  };
  auto real = [&](std::string_view key, double& out) {
    if (auto it = values.find(key); it != values.end()) {
      if (auto v = detail::parse_real(it->second)) out = *v;
      else bad(key, "expected a number, got `" + it->second + "`");
    }
  };
  auto real_list = [&](std::string_view key, std::vector<double>& out) {
    if (auto it = values.find(key); it != values.end()) {
      out.clear();
      for (auto item : detail::split(it->second, ',')) {
        if (auto v = detail::parse_real(item)) out.push_back(*v);
        else bad(key, "expected a number list, got `" + it->second + "`");
      }
    }
  };
  auto u64 = [&](std::string_view key) -> std::optional<std::uint64_t> {
    if (auto it = values.find(key); it != values.end()) {
      if (auto v = detail::parse_int<std::uint64_t>(it->second)) return v;
      bad(key, "expected a non-negative integer, got `" + it->second + "`");
    }
    return std::nullopt;
  };

  std::optional<ExperimentKind> kind;
  if (auto it = values.find("kind"); it == values.end()) {
    errors.push_back("kind: missing required key");
  } else if (!(kind = parse_kind(it->second))) {
    bad("kind", "unknown experiment kind `" + it->second + "`");
  } else {
    cfg.kind = *kind;
  }

  if (auto it = values.find("N"); it == values.end()) {
    errors.push_back("N: missing required key");
  } else if (auto v = detail::parse_int<int>(it->second)) {
    cfg.N = *v;
    if (cfg.N < 1) bad("N", "must be >= 1, got " + it->second);
  } else {
    bad("N", "expected an integer, got `" + it->second + "`");
  }

  if (auto it = values.find("mirror"); it != values.end()) {
    if (auto v = detail::parse_bool(it->second)) cfg.mirror = *v;
    else bad("mirror", "expected true or false");
  }
  if (auto it = values.find("h_polariser"); it != values.end()) {
    if (auto v = detail::parse_bool(it->second)) cfg.h_polariser = *v;
    else bad("h_polariser", "expected true or false");
  }
  if (auto it = values.find("input"); it != values.end()) {
    cfg.input = it->second;
    if (cfg.input != "H" && cfg.input != "V" && cfg.input != "D" &&
        cfg.input != "A") {
      bad("input", "expected one of H, V, D, A");
    }
  }
  cfg.steps = u64("steps");
  real_list("delta", cfg.delta);
  if (auto it = values.find("mu_policy"); it != values.end()) {
    cfg.mu_policy = it->second;
    if (cfg.mu_policy != "fixed" && cfg.mu_policy != "tuned" &&
        cfg.mu_policy != "tan") {
      bad("mu_policy", "expected fixed, tuned or tan");
    }
  }
  real("mu", cfg.mu);
  cfg.shots = u64("shots");
  if (auto v = u64("seed")) cfg.seed = *v;
  if (auto v = u64("workers")) cfg.workers = static_cast<unsigned>(*v);
  real_list("beta", cfg.beta);
  real("alpha", cfg.alpha);
  real("a", cfg.a);
  real("w0", cfg.w0);
  if (values.contains("grid_extent")) {
    double v = 0.0;
    real("grid_extent", v);
    cfg.grid_extent = v;
  }
  cfg.grid_samples = u64("grid_samples");
  if (auto it = values.find("n"); it != values.end()) {
    for (auto item : detail::split(it->second, ',')) {
      if (auto v = detail::parse_int<int>(item)) cfg.cycles.push_back(*v);
      else bad("n", "expected an integer list, got `" + it->second + "`");
    }
  }
  real_list("y", cfg.y);
  if (auto it = values.find("output"); it != values.end()) cfg.output = it->second;
  if (auto it = values.find("format"); it != values.end()) {
    if (it->second == "csv") cfg.format = OutputFormat::Csv;
    else if (it->second == "json") cfg.format = OutputFormat::Json;
    else bad("format", "expected csv or json");
  }

  // Ranges.
  constexpr double half_pi = std::numbers::pi / 2;
  for (double d : cfg.delta) {
    if (!(d >= 0.0 && d < half_pi)) bad("delta", "must lie in [0, pi/2)");
  }
  if (cfg.delta.empty()) bad("delta", "grid is empty");
  if (!(cfg.mu >= 0.0 && cfg.mu <= 1.0)) bad("mu", "must lie in [0, 1]");
  for (double b : cfg.beta) {
    if (!(b >= 0.0 && b <= half_pi)) bad("beta", "must lie in [0, pi/2]");
  }
  if (cfg.beta.empty()) bad("beta", "list is empty");
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= half_pi)) {
    bad("alpha", "must lie in [0, pi/2]");
  }
  if (!(cfg.a >= 0.0)) bad("a", "must be >= 0");
  if (!(cfg.w0 > 0.0)) bad("w0", "must be > 0");
  if (cfg.shots && *cfg.shots < 1) bad("shots", "must be >= 1");
  if (cfg.workers < 1) bad("workers", "must be >= 1");
  if (cfg.grid_samples && *cfg.grid_samples < 2) bad("grid_samples", "must be >= 2");
  if (cfg.grid_extent && cfg.w0 > 0.0 &&
      *cfg.grid_extent < (6.0 * cfg.w0 + cfg.a) * (1.0 - 1e-12)) {
    bad("grid_extent", "must cover at least 6 w0 + a");
  }
  if (cfg.N >= 1) {
    for (int n : cfg.cycles) {
      if (n < 0 || n > 2 * cfg.N) bad("n", "must lie in [0, 2N]");
    }
    if (cfg.mu_policy != "fixed") {
      for (double d : cfg.delta) {
        if (!(d >= 0.0 && d < half_pi)) continue;
        const double mu = cfg.mu_policy == "tuned" ? weak_value_tuned_mu(d, cfg.N)
                                                   : tan_delta_mu(d);
        if (mu > 1.0) {
          bad("mu_policy", "attenuation for delta = " + detail::exact_real(d) +
                               " exceeds 1");
        }
      }
    }
  }

  // Per-kind requirements.
  if (kind) {
    const bool needs_shots = *kind == ExperimentKind::MonteCarlo ||
                             *kind == ExperimentKind::PerturbScan;
    if (needs_shots && !cfg.shots) {
      errors.push_back("shots: missing required key for kind " +
                       std::string(to_string(*kind)));
    }
    if (*kind == ExperimentKind::MonteCarlo && cfg.delta.size() != 1) {
      bad("delta", "montecarlo takes a single value");
    }
    if (*kind == ExperimentKind::Pointer && cfg.beta.size() != 1) {
      bad("beta", "pointer takes a single value");
    }
    if (*kind == ExperimentKind::Pointer && cfg.h_polariser && cfg.beta[0] != 0.0) {
      bad("beta", "the H-polariser variant post-selects on D (beta = 0)");
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

/// Canonical text for a config: every key that affects the result, with
/// doubles written so that parse_config reproduces them bit for bit. The
/// output path is left out.
inline std::string to_config_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto reals = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += detail::exact_real(v[i]);
    }
    return s;
  };
  out << "kind = " << to_string(cfg.kind) << '\n';
  out << "N = " << cfg.N << '\n';
  out << "mirror = " << (cfg.mirror ? "true" : "false") << '\n';
  switch (cfg.kind) {
    case ExperimentKind::Evolve:
      out << "input = " << cfg.input << '\n';
      if (cfg.steps) out << "steps = " << *cfg.steps << '\n';
      break;
    case ExperimentKind::WeakValue:
      out << "beta = " << reals(cfg.beta) << '\n';
      break;
    case ExperimentKind::Homodyne:
      break;
    case ExperimentKind::PerturbScan:
    case ExperimentKind::MonteCarlo:
      out << "delta = " << reals(cfg.delta) << '\n';
      out << "mu_policy = " << cfg.mu_policy << '\n';
      out << "mu = " << detail::exact_real(cfg.mu) << '\n';
      if (cfg.shots) out << "shots = " << *cfg.shots << '\n';
      out << "seed = " << cfg.seed << '\n';
      out << "workers = " << cfg.workers << '\n';
      break;
    case ExperimentKind::Pointer:
    case ExperimentKind::ProjectorProfile:
      out << "alpha = " << detail::exact_real(cfg.alpha) << '\n';
      out << "a = " << detail::exact_real(cfg.a) << '\n';
      out << "w0 = " << detail::exact_real(cfg.w0) << '\n';
      if (cfg.kind == ExperimentKind::Pointer) {
        out << "beta = " << reals(cfg.beta) << '\n';
        out << "h_polariser = " << (cfg.h_polariser ? "true" : "false") << '\n';
        if (cfg.grid_extent) {
          out << "grid_extent = " << detail::exact_real(*cfg.grid_extent) << '\n';
        }
        if (cfg.grid_samples) out << "grid_samples = " << *cfg.grid_samples << '\n';
      } else {
        if (!cfg.cycles.empty()) {
          out << "n = ";
          for (std::size_t i = 0; i < cfg.cycles.size(); ++i) {
            out << (i ? ", " : "") << cfg.cycles[i];
          }
          out << '\n';
        }
        if (!cfg.y.empty()) out << "y = " << reals(cfg.y) << '\n';
      }
      break;
  }
  out << "format = " << (cfg.format == OutputFormat::Csv ? "csv" : "json") << '\n';
  return out.str();
}

}  // namespace cheshire

#endif  // CHESHIRE_CONFIG_HPP
