#ifndef CHESHIRE_RUNNER_HPP
#define CHESHIRE_RUNNER_HPP

// Turns a validated ExperimentConfig into a CSV or JSON artifact. Rendering
// is a pure function of the config, so identical configs give identical bytes.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cheshire/config.hpp"
#include "cheshire/core_sim.hpp"
#include "cheshire/experiments.hpp"
#include "cheshire/pointer_lab.hpp"
#include "cheshire/weak_values.hpp"

namespace cheshire {

using ordered_json = nlohmann::ordered_json;

namespace detail {

/// 12 significant digits; non-finite values print as nan/inf.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Same rounding for JSON; NaN and infinities become null.
inline ordered_json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(fmt(v));
}

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  template <class... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> r;
    (r.push_back(cell(cells)), ...);
    rows_.push_back(std::move(r));
  }

  std::string csv(const std::string& header) const {
    std::string out = header;
    out += join(columns_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::string& v) { return v; }

  static std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    return s + '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string csv_header(const ExperimentConfig& cfg) {
  std::string out = "# tool = " + std::string(kToolName) + " " +
                    std::string(kToolVersion) + "\n";
  std::istringstream lines(to_config_text(cfg));
  for (std::string line; std::getline(lines, line);) out += "# " + line + "\n";
  return out;
}

inline ordered_json json_envelope(const ExperimentConfig& cfg) {
  ordered_json j;
  j["tool"] = std::string(kToolName);
  j["version"] = std::string(kToolVersion);
  j["kind"] = std::string(to_string(cfg.kind));
  j["config"] = to_config_text(cfg);
  return j;
}

inline std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

inline Polarisation named_polarisation(const std::string& name) {
  if (name == "V") return Polarisation::V();
  if (name == "D") return Polarisation::D();
  if (name == "A") return Polarisation::A();
  return Polarisation::H();
}

inline MuPolicy mu_policy(const ExperimentConfig& cfg) {
  if (cfg.mu_policy == "tuned") return WeakValueTunedMu{};
  if (cfg.mu_policy == "tan") return TanDeltaMu{};
  return FixedMu{cfg.mu};
}

inline GaussianPointer pointer_of(const ExperimentConfig& cfg) {
  return {cfg.w0, cfg.a, cfg.alpha, cfg.beta.empty() ? 0.0 : cfg.beta.front()};
}

inline std::optional<Grid> grid_of(const ExperimentConfig& cfg) {
  if (!cfg.grid_extent && !cfg.grid_samples) return std::nullopt;
  const GaussianPointer gp = pointer_of(cfg);
  Grid g = Grid::default_for(gp);
  if (cfg.grid_extent) g.half_extent = *cfg.grid_extent;
  if (cfg.grid_samples) g.samples = static_cast<std::size_t>(*cfg.grid_samples);
  return g;
}

// --- one renderer per experiment kind -------------------------------------

inline std::string render_evolve(const ExperimentConfig& cfg) {
  const ProtocolParams params(cfg.N, cfg.mirror);
  const std::uint64_t steps = cfg.steps.value_or(params.default_steps());
  SystemState state = make_initial(named_polarisation(cfg.input));

  Table table({"n", "L_H_re", "L_H_im", "L_V_re", "L_V_im", "R_H_re", "R_H_im",
               "R_V_re", "R_V_im", "leak_probability", "norm"});
  auto record = [&] {
    const Polarisation l = state.left();
    const Polarisation r = state.right();
    table.row(static_cast<std::uint64_t>(state.steps()), l.h.real(), l.h.imag(),
              l.v.real(), l.v.imag(), r.h.real(), r.h.imag(), r.v.real(),
              r.v.imag(), leak_probability(state), state.norm());
  };
  record();
  for (std::uint64_t i = 0; i < steps; ++i) {
    state.advance(params);
    if (cfg.format == OutputFormat::Csv) record();
  }
  if (cfg.format == OutputFormat::Csv) return table.csv(csv_header(cfg));

  ordered_json j = json_envelope(cfg);
  ordered_json res;
  res["steps"] = steps;
  res["epsilon"] = jnum(params.epsilon());
  for (auto [name, mode] : {std::pair{"L", ModeIndex::L()}, {"R", ModeIndex::R()}}) {
    const Polarisation p = state.at(mode);
    res[name] = {{"H", {jnum(p.h.real()), jnum(p.h.imag())}},
                 {"V", {jnum(p.v.real()), jnum(p.v.imag())}}};
  }
  res["leak_probability"] = jnum(leak_probability(state));
  res["norm"] = jnum(state.norm());
  res["survival_closed_form_2N"] = jnum(survival_amplitude_closed_form(cfg.N));
  j["results"] = res;
  return dump(j);
}

inline std::string render_weak_value(const ExperimentConfig& cfg) {
  Table table({"beta", "N", "mirror", "analytic", "tan_approx", "simulated_re",
               "simulated_im"});
  ordered_json rows = ordered_json::array();
  for (double beta : cfg.beta) {
    const double analytic = sigma_x_weak_analytic(beta, cfg.N, cfg.mirror);
    const double approx = sigma_x_weak_tan_approx(beta, cfg.mirror);
    const cplx sim = sigma_x_weak_simulated(beta, cfg.N, cfg.mirror);
    table.row(beta, cfg.N, cfg.mirror, analytic, approx, sim.real(), sim.imag());
    rows.push_back({{"beta", jnum(beta)},
                    {"analytic", jnum(analytic)},
                    {"tan_approx", jnum(approx)},
                    {"simulated_re", jnum(sim.real())},
                    {"simulated_im", jnum(sim.imag())}});
  }
  if (cfg.format == OutputFormat::Csv) return table.csv(csv_header(cfg));
  ordered_json j = json_envelope(cfg);
  j["results"] = rows;
  return dump(j);
}

inline std::string render_homodyne(const ExperimentConfig& cfg) {
  const HomodyneResult r = homodyne_run(cfg.N, cfg.mirror);
  if (cfg.format == OutputFormat::Csv) {
    Table table({"N", "mirror", "survival", "P_D0", "P_D1", "P_loss"});
    table.row(cfg.N, cfg.mirror, r.survival.real(), r.p_d0, r.p_d1, r.p_loss);
    return table.csv(csv_header(cfg));
  }
  ordered_json j = json_envelope(cfg);
  j["results"] = {{"survival", jnum(r.survival.real())},
                  {"P_D0", jnum(r.p_d0)},
                  {"P_D1", jnum(r.p_d1)},
                  {"P_loss", jnum(r.p_loss)}};
  return dump(j);
}

inline std::string render_montecarlo(const ExperimentConfig& cfg) {
  const double delta = cfg.delta.front();
  const double mu = resolve_mu(mu_policy(cfg), delta, cfg.N);
  const PerturbationParams p{delta, mu, cfg.N};
  const DetectionProbabilities pr = perturbed_probabilities(p, cfg.mirror);
  const DetectionStats stats =
      monte_carlo(p, *cfg.shots, cfg.seed, cfg.mirror, cfg.workers);
  // Undefined when nothing was detected; propagates as exit code 3.
  const double r_emp = stats.ratio();
  const double se = stats.standard_error();
  const double r_closed = ratio(pr.d, pr.a);
  const double r_amp = amplitude_ratio(p, cfg.mirror);

  if (cfg.format == OutputFormat::Csv) {
    Table table({"delta", "mu", "N", "mirror", "shots", "seed", "count_D",
                 "count_A", "lost", "P_D", "P_A", "ratio_closed",
                 "ratio_amplitude", "ratio_empirical", "stderr"});
    table.row(delta, mu, cfg.N, cfg.mirror, stats.shots, stats.seed, stats.count_d,
              stats.count_a, stats.lost(), pr.d, pr.a, r_closed, r_amp, r_emp, se);
    return table.csv(csv_header(cfg));
  }
  ordered_json j = json_envelope(cfg);
  j["results"] = {{"delta", jnum(delta)},
                  {"mu", jnum(mu)},
                  {"count_D", stats.count_d},
                  {"count_A", stats.count_a},
                  {"lost", stats.lost()},
                  {"P_D", jnum(pr.d)},
                  {"P_A", jnum(pr.a)},
                  {"ratio_closed", jnum(r_closed)},
                  {"ratio_amplitude", jnum(r_amp)},
                  {"ratio_empirical", jnum(r_emp)},
                  {"stderr", jnum(se)}};
  return dump(j);
}

inline std::string render_perturb_scan(const ExperimentConfig& cfg) {
  const std::vector<ScanRow> rows =
      snr_scan(cfg.delta, mu_policy(cfg), cfg.N, *cfg.shots, cfg.seed, cfg.workers);
  if (cfg.format == OutputFormat::Csv) {
    Table table({"delta", "mu", "N", "P_D", "P_A", "ratio_closed",
                 "ratio_empirical", "stderr", "z"});
    for (const auto& r : rows) {
      table.row(r.delta, r.mu, r.half_cycles, r.p_d, r.p_a, r.ratio_closed,
                r.ratio_empirical, r.standard_error, r.z);
    }
    return table.csv(csv_header(cfg));
  }
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    out.push_back({{"delta", jnum(r.delta)},
                   {"mu", jnum(r.mu)},
                   {"N", r.half_cycles},
                   {"P_D", jnum(r.p_d)},
                   {"P_A", jnum(r.p_a)},
                   {"ratio_closed", jnum(r.ratio_closed)},
                   {"ratio_amplitude", jnum(r.ratio_amplitude)},
                   {"ratio_empirical", jnum(r.ratio_empirical)},
                   {"stderr", jnum(r.standard_error)},
                   {"z", jnum(r.z)},
                   {"counts_mirror", {r.mirror_stats.count_d, r.mirror_stats.count_a}},
                   {"counts_open", {r.open_stats.count_d, r.open_stats.count_a}}});
  }
  ordered_json j = json_envelope(cfg);
  j["results"] = out;
  return dump(j);
}

inline std::string render_pointer(const ExperimentConfig& cfg) {
  const GaussianPointer gp = pointer_of(cfg);
  const std::optional<Grid> grid = grid_of(cfg);

  Profile profile;
  ordered_json summary;
  if (cfg.h_polariser) {
    const HPolariserResult r = h_polariser_variant(gp, cfg.N, cfg.mirror, grid);
    profile = r.profile;
    summary["centroid"] = jnum(r.centroid);
  } else {
    const TransverseField field = prepare_pointer(gp, grid);
    profile = evolve_postselect(field, cfg.N, cfg.mirror, gp.beta);
    const PointerReadout r = pointer_readout(gp, cfg.N, cfg.mirror, grid);
    summary["centroid"] = jnum(r.centroid_after);
    summary["centroid_before"] = jnum(r.centroid_before);
    summary["displacement"] = jnum(r.displacement_after);
    summary["postselection_power"] = jnum(r.postselection_power);
    summary["weak_value"] = gp.a > 0.0 ? jnum(r.weak_value) : ordered_json(nullptr);
  }
  summary["survival"] = jnum(survival_amplitude_closed_form(cfg.N));
  summary["weak_coupling"] = gp.weak_coupling();

  if (cfg.format == OutputFormat::Csv) {
    Table table({"y", "I"});
    const auto intensity = profile.intensity();
    for (std::size_t i = 0; i < intensity.size(); ++i) {
      table.row(profile.grid.y(i), intensity[i]);
    }
    return table.csv(csv_header(cfg));
  }
  ordered_json j = json_envelope(cfg);
  j["results"] = summary;
  return dump(j);
}

inline std::string render_projector_profile(const ExperimentConfig& cfg) {
  const GaussianPointer gp = pointer_of(cfg);
  std::vector<int> cycles = cfg.cycles;
  if (cycles.empty()) {
    for (int n = 0; n <= 2 * cfg.N; ++n) cycles.push_back(n);
  }
  std::vector<double> ys = cfg.y;
  if (ys.empty()) ys = {-cfg.a, -cfg.a / 2, 0.0, cfg.a / 2, cfg.a};

  Table table({"n", "y", "closed_form", "exact", "direct_re", "direct_im"});
  ordered_json rows = ordered_json::array();
  for (int n : cycles) {
    for (double y : ys) {
      const double closed = projector_R_weak_profile(n, cfg.N, y, gp);
      const double exact = projector_R_weak_exact(n, cfg.N, y, gp);
      const cplx direct = projector_R_weak_direct(n, cfg.N, y, gp);
      table.row(n, y, closed, exact, direct.real(), direct.imag());
      rows.push_back({{"n", n},
                      {"y", jnum(y)},
                      {"closed_form", jnum(closed)},
                      {"exact", jnum(exact)},
                      {"direct_re", jnum(direct.real())},
                      {"direct_im", jnum(direct.imag())}});
    }
  }
  if (cfg.format == OutputFormat::Csv) return table.csv(csv_header(cfg));
  ordered_json j = json_envelope(cfg);
  j["results"] = rows;
  return dump(j);
}

}  // namespace detail

/// Render the artifact for a validated config. Module errors (for instance
/// UndefinedValueError) propagate to the caller.
inline std::string render(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Evolve: return detail::render_evolve(cfg);
    case ExperimentKind::WeakValue: return detail::render_weak_value(cfg);
    case ExperimentKind::Homodyne: return detail::render_homodyne(cfg);
    case ExperimentKind::PerturbScan: return detail::render_perturb_scan(cfg);
    case ExperimentKind::MonteCarlo: return detail::render_montecarlo(cfg);
    case ExperimentKind::Pointer: return detail::render_pointer(cfg);
    case ExperimentKind::ProjectorProfile: return detail::render_projector_profile(cfg);
  }
  return {};
}

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitConfig = 2,
  kExitUndefined = 3,
};

/// Machine-readable error record written to stderr on failure.
inline std::string error_record(std::string_view error, std::string_view message,
                                const std::vector<std::string>& details = {}) {
  ordered_json j;
  j["error"] = std::string(error);
  j["message"] = std::string(message);
  if (!details.empty()) j["details"] = details;
  return j.dump() + "\n";
}

struct RunOutcome {
  int exit_code = kExitOk;
  std::string artifact;  // empty on failure
  std::string error;     // JSON error record on failure
};

/// render() with module errors mapped to exit codes. Writing is left to the
/// caller.
inline RunOutcome run(const ExperimentConfig& cfg) {
  RunOutcome out;
  try {
    out.artifact = render(cfg);
  } catch (const UndefinedWeakValue& e) {
    out.exit_code = kExitUndefined;
    ordered_json j;
    j["error"] = "undefined_value";
    j["message"] = e.what();
    j["numerator"] = {detail::jnum(e.numerator().real()), detail::jnum(e.numerator().imag())};
    j["denominator"] = {detail::jnum(e.denominator().real()),
                        detail::jnum(e.denominator().imag())};
    out.error = j.dump() + "\n";
  } catch (const UndefinedValueError& e) {
    out.exit_code = kExitUndefined;
    out.error = error_record("undefined_value", e.what());
  } catch (const std::invalid_argument& e) {
    out.exit_code = kExitConfig;
    out.error = error_record("config", e.what());
  }
  return out;
}

}  // namespace cheshire

#endif  // CHESHIRE_RUNNER_HPP
