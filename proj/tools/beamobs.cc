// beamobs: modal basis, observability scans, sensor placement and UKF studies
// for a cantilevered Euler-Bernoulli beam.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "beamobs/config.h"
#include "beamobs/errors.h"
#include "beamobs/experiment.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> budget;
  std::optional<int> modes;
  std::optional<std::string> system;
  std::optional<std::string> format;
  std::optional<int> threads;
};

beamobs::ExperimentConfig Resolve(const Overrides& o, const std::string& command) {
  beamobs::ExperimentConfig config;
  if (!o.config_path.empty()) config = beamobs::LoadConfig(o.config_path);
  if (o.out) config.output_dir = *o.out;
  if (o.seed) config.seed = *o.seed;
  if (o.budget) config.budget = *o.budget;
  if (o.system) config.system = beamobs::ParseSystemVariant(*o.system);
  if (o.format) config.format = beamobs::ParseTableFormat(*o.format);
  if (o.threads) config.threads = *o.threads;
  if (o.modes) {
    if (command == "modes" || command == "repro") config.n_modes = *o.modes;
    if (command == "scan" || command == "repro") {
      config.scan_max_modes = *o.modes;
      config.scan_min_modes = std::min(config.scan_min_modes, *o.modes);
    }
    if (command == "place" || command == "repro") config.place_modes = *o.modes;
    if (command == "estimate" || command == "repro") config.estimate_modes = *o.modes;
  }
  config.Validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observability and sensor placement for a cantilevered beam"};
  app.require_subcommand(1);

  Overrides overrides;
  const std::map<std::string, std::function<beamobs::WrittenFiles(
                                  const beamobs::ExperimentConfig&)>>
      commands = {{"modes", beamobs::CmdModes},
                  {"scan", beamobs::CmdScan},
                  {"place", beamobs::CmdPlace},
                  {"estimate", beamobs::CmdEstimate},
                  {"repro", beamobs::CmdRepro}};
  const std::map<std::string, std::string> help = {
      {"modes", "Mode shapes, curvatures and natural frequencies"},
      {"scan", "Objective J(x) along the beam for each mode count"},
      {"place", "Relaxed and rounded sensor placements over a budget sweep"},
      {"estimate", "Monte-Carlo UKF comparison of sensor placements"},
      {"repro", "Run every command with one configuration"}};

  for (const auto& [name, run] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", overrides.config_path, "TOML or JSON experiment file")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", overrides.out, "Output directory");
    sub->add_option("--seed", overrides.seed, "Random seed");
    sub->add_option("--budget", overrides.budget, "Sensor budget p");
    sub->add_option("--modes", overrides.modes, "Number of modes");
    sub->add_option("--system", overrides.system, "truncated, continuum or both");
    sub->add_option("--format", overrides.format, "Table format: csv or json");
    sub->add_option("--threads", overrides.threads, "Worker threads (0 = all cores)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  beamobs::ExperimentConfig config;
  try {
    config = Resolve(overrides, command);
  } catch (const beamobs::ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kExitConfig;
  }

  try {
    for (const auto& path : commands.at(command)(config)) {
      fmt::print("{}\n", path.string());
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "{} failed: {}\n", command, e.what());
    try {
      const auto path = beamobs::WriteDiagnostic(config, command, e);
      fmt::print(stderr, "diagnostic written to {}\n", path.string());
    } catch (const std::exception& inner) {
      fmt::print(stderr, "could not write diagnostic: {}\n", inner.what());
    }
    return kExitNumerical;
  }
  return 0;
}
