#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "beamobs/beam_model.h"

namespace beamobs {

enum class SystemVariant { kTruncated, kContinuum, kBoth };
enum class TableFormat { kCsv, kJson };

SystemVariant ParseSystemVariant(std::string_view text);
std::string_view ToString(SystemVariant variant);
TableFormat ParseTableFormat(std::string_view text);

/// Everything a subcommand needs. Defaults reproduce the aluminium strip
/// study: 2 m x 20 mm x 5 mm, N = 501, p = 10, w = 5.
struct ExperimentConfig {
  // [beam]
  double length_m = 2.0;
  double width_m = 0.02;
  double thickness_m = 0.005;
  double elastic_modulus_pa = 70e9;
  double density_kg_m3 = 2700.0;
  int grid_size = 501;

  // [modes]
  int n_modes = 10;

  // [scan]
  int scan_min_modes = 2;
  int scan_max_modes = 10;

  // [gramian]
  double horizon_periods = 1.0;
  int steps_per_period = 4000;
  double epsilon = 1e-4;

  // [place]
  int place_modes = 8;
  int budget = 10;
  int sweep_max_budget = 50;
  double weight = 5.0;

  // [estimate]
  int estimate_modes = 10;
  int estimate_steps_per_period = 2000;
  int trials = 20;
  double measurement_noise = 1e-4;
  double process_noise = 1e-10;
  double initial_displacement_variance = 1e-2;
  double initial_velocity_variance = 1e-4;
  double truth_tip_deflection_m = 0.05;

  // [run]
  std::uint64_t seed = 1;
  SystemVariant system = SystemVariant::kBoth;
  TableFormat format = TableFormat::kCsv;
  std::string output_dir = "out";
  /// 0 picks the hardware concurrency.
  int threads = 0;

  BeamSpec Beam() const;
  /// Throws ConfigError on any out-of-range value.
  void Validate() const;
};

/// Parses a JSON document ({"beam": {...}, "place": {...}, ...}) onto the
/// defaults. Unknown sections or keys throw ConfigError.
ExperimentConfig ParseJsonConfig(std::string_view text);

/// Same for the TOML subset used by the shipped configs: [section] headers,
/// `key = value` with numbers, booleans and double-quoted strings, # comments.
ExperimentConfig ParseTomlConfig(std::string_view text);

/// Every key of `config` in the sectioned JSON layout ParseJsonConfig reads.
std::string ConfigToJson(const ExperimentConfig& config);

/// Picks the parser from the extension (.json or .toml) and validates.
ExperimentConfig LoadConfig(const std::filesystem::path& path);

}  // namespace beamobs
