// Command-line front end: `cheshire <experiment> [key=value ...] [flags]`.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cheshire/config.hpp"
#include "cheshire/runner.hpp"

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cheshire;

  CLI::App app{"Dynamical quantum Cheshire cat simulator"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;
  app.add_option("--config", config_path, "key = value experiment config");
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::string> overrides;
  const std::vector<std::pair<const char*, const char*>> commands{
      {"evolve", "evolve a basis state through the cavities"},
      {"weak-value", "sigma_x weak value, analytic and simulated"},
      {"homodyne", "homodyne comparison against a reference arm"},
      {"perturb-scan", "SNR of the delta-perturbation experiment over a grid"},
      {"montecarlo", "photon-counting run of the perturbation experiment"},
      {"pointer", "Gaussian-pointer weak measurement (profile or summary)"},
      {"projector-profile", "weak value of the right-cavity projector"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)
        ->add_option("settings", overrides, "config overrides as key=value");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string kind = app.get_subcommands().front()->get_name();

  std::string text;
  if (!config_path.empty()) {
    auto contents = read_file(config_path);
    if (!contents) {
      std::cerr << error_record("io", "cannot read config file " + config_path);
      return kExitIo;
    }
    text = *contents + "\n";
  }
  text += "kind = " + kind + "\n";
  for (const auto& o : overrides) text += o + "\n";
  if (seed) text += "seed = " + std::to_string(*seed) + "\n";
  if (!format.empty()) text += "format = " + format + "\n";

  ExperimentConfig cfg;
  try {
    cfg = parse_config(text);
  } catch (const ConfigError& e) {
    std::cerr << error_record("config", "invalid configuration", e.messages());
    return kExitConfig;
  }
  if (!out_path.empty()) cfg.output = out_path;

  const RunOutcome outcome = run(cfg);
  if (outcome.exit_code != kExitOk) {
    std::cerr << outcome.error;
    return outcome.exit_code;
  }

  if (cfg.output.empty()) {
    std::cout << outcome.artifact;
    return kExitOk;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  out << outcome.artifact;
  if (!out) {
    std::cerr << error_record("io", "cannot write " + cfg.output);
    return kExitIo;
  }
  return kExitOk;
}
