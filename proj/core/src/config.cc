#include "beamobs/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

#include "beamobs/errors.h"
#include "json.hpp"

namespace beamobs {

namespace {

using Scalar = std::variant<double, bool, std::string>;

std::string Key(std::string_view section, std::string_view key) {
  return std::string(section) + "." + std::string(key);
}

double AsNumber(const Scalar& value, const std::string& key) {
  if (const double* d = std::get_if<double>(&value)) return *d;
  throw ConfigError("config: " + key + " must be a number");
}

int AsInt(const Scalar& value, const std::string& key) {
  const double d = AsNumber(value, key);
  if (d != std::floor(d) || std::abs(d) > 2e9) {
    throw ConfigError("config: " + key + " must be an integer");
  }
  return static_cast<int>(d);
}

std::string AsString(const Scalar& value, const std::string& key) {
  if (const std::string* s = std::get_if<std::string>(&value)) return *s;
  throw ConfigError("config: " + key + " must be a string");
}

using Setter = std::function<void(ExperimentConfig&, const Scalar&, const std::string&)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> setters = [] {
    std::map<std::string, Setter> s;
    const auto number = [&s](const char* key, double ExperimentConfig::*field) {
      s[key] = [field](ExperimentConfig& c, const Scalar& v, const std::string& k) {
        c.*field = AsNumber(v, k);
      };
    };
    const auto integer = [&s](const char* key, int ExperimentConfig::*field) {
      s[key] = [field](ExperimentConfig& c, const Scalar& v, const std::string& k) {
        c.*field = AsInt(v, k);
      };
    };
    number("beam.length_m", &ExperimentConfig::length_m);
    number("beam.width_m", &ExperimentConfig::width_m);
    number("beam.thickness_m", &ExperimentConfig::thickness_m);
    number("beam.elastic_modulus_pa", &ExperimentConfig::elastic_modulus_pa);
    number("beam.density_kg_m3", &ExperimentConfig::density_kg_m3);
    integer("beam.grid_size", &ExperimentConfig::grid_size);
    integer("modes.n_modes", &ExperimentConfig::n_modes);
    integer("scan.min_modes", &ExperimentConfig::scan_min_modes);
    integer("scan.max_modes", &ExperimentConfig::scan_max_modes);
    number("gramian.horizon_periods", &ExperimentConfig::horizon_periods);
    integer("gramian.steps_per_period", &ExperimentConfig::steps_per_period);
    number("gramian.epsilon", &ExperimentConfig::epsilon);
    integer("place.n_modes", &ExperimentConfig::place_modes);
    integer("place.budget", &ExperimentConfig::budget);
    integer("place.sweep_max_budget", &ExperimentConfig::sweep_max_budget);
    number("place.weight", &ExperimentConfig::weight);
    integer("estimate.n_modes", &ExperimentConfig::estimate_modes);
    integer("estimate.steps_per_period", &ExperimentConfig::estimate_steps_per_period);
    integer("estimate.trials", &ExperimentConfig::trials);
    number("estimate.measurement_noise", &ExperimentConfig::measurement_noise);
    number("estimate.process_noise", &ExperimentConfig::process_noise);
    number("estimate.initial_displacement_variance",
           &ExperimentConfig::initial_displacement_variance);
    number("estimate.initial_velocity_variance",
           &ExperimentConfig::initial_velocity_variance);
    number("estimate.truth_tip_deflection_m", &ExperimentConfig::truth_tip_deflection_m);
    integer("run.threads", &ExperimentConfig::threads);
    s["run.seed"] = [](ExperimentConfig& c, const Scalar& v, const std::string& k) {
      const double d = AsNumber(v, k);
      if (d < 0 || d != std::floor(d) || d > 9.007199254740992e15) {
        throw ConfigError("config: " + k + " must be a non-negative integer");
      }
      c.seed = static_cast<std::uint64_t>(d);
    };
    s["run.system"] = [](ExperimentConfig& c, const Scalar& v, const std::string& k) {
      c.system = ParseSystemVariant(AsString(v, k));
    };
    s["run.format"] = [](ExperimentConfig& c, const Scalar& v, const std::string& k) {
      c.format = ParseTableFormat(AsString(v, k));
    };
    s["run.output_dir"] = [](ExperimentConfig& c, const Scalar& v, const std::string& k) {
      c.output_dir = AsString(v, k);
    };
    return s;
  }();
  return setters;
}

void Apply(ExperimentConfig& config, const std::string& key, const Scalar& value) {
  const auto it = Setters().find(key);
  if (it == Setters().end()) throw ConfigError("config: unknown key " + key);
  it->second(config, value, key);
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Scalar ParseTomlValue(std::string_view text, int line) {
  const auto fail = [line](const std::string& what) {
    return ConfigError("config line " + std::to_string(line) + ": " + what);
  };
  if (text.empty()) throw fail("missing value");
  if (text.front() == '"' || text.front() == '\'') {
    const auto close = text.find(text.front(), 1);
    if (close == std::string_view::npos) throw fail("unterminated string");
    const std::string_view rest = Trim(text.substr(close + 1));
    if (!rest.empty() && rest.front() != '#') throw fail("trailing characters");
    return std::string(text.substr(1, close - 1));
  }
  const auto hash = text.find('#');
  if (hash != std::string_view::npos) text = Trim(text.substr(0, hash));
  if (text == "true") return true;
  if (text == "false") return false;
  std::string cleaned;
  for (char ch : text) {
    if (ch != '_') cleaned.push_back(ch);
  }
  double value = 0.0;
  const char* begin = cleaned.data();
  const char* end = begin + cleaned.size();
  if (!cleaned.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) throw fail("cannot parse value '" + cleaned + "'");
  return value;
}

}  // namespace

SystemVariant ParseSystemVariant(std::string_view text) {
  if (text == "truncated") return SystemVariant::kTruncated;
  if (text == "continuum") return SystemVariant::kContinuum;
  if (text == "both") return SystemVariant::kBoth;
  throw ConfigError("system must be truncated, continuum or both");
}

std::string_view ToString(SystemVariant variant) {
  switch (variant) {
    case SystemVariant::kTruncated: return "truncated";
    case SystemVariant::kContinuum: return "continuum";
    case SystemVariant::kBoth: return "both";
  }
  return "unknown";
}

TableFormat ParseTableFormat(std::string_view text) {
  if (text == "csv") return TableFormat::kCsv;
  if (text == "json") return TableFormat::kJson;
  throw ConfigError("format must be csv or json");
}

BeamSpec ExperimentConfig::Beam() const {
  return BeamSpec(length_m, width_m, thickness_m, elastic_modulus_pa, density_kg_m3);
}

void ExperimentConfig::Validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  require(length_m > 0 && width_m > 0 && thickness_m > 0, "beam dimensions must be > 0");
  require(elastic_modulus_pa > 0 && density_kg_m3 > 0, "material constants must be > 0");
  require(n_modes >= 1 && place_modes >= 1 && estimate_modes >= 1, "mode counts must be >= 1");
  require(scan_min_modes >= 1 && scan_max_modes >= scan_min_modes, "bad scan mode range");
  const int most_modes =
      std::max({n_modes, place_modes, estimate_modes, scan_max_modes});
  require(most_modes <= 60, "mode counts above 60 are not supported");
  require(grid_size >= 20 * most_modes, "grid_size must be at least 20 x the mode count");
  require(horizon_periods > 0, "horizon_periods must be > 0");
  require(steps_per_period >= 10 && estimate_steps_per_period >= 10,
          "steps_per_period must be >= 10");
  require(epsilon > 0, "epsilon must be > 0");
  require(budget >= 1 && budget <= grid_size, "budget must lie in [1, grid_size]");
  require(sweep_max_budget >= 1 && sweep_max_budget <= grid_size,
          "sweep_max_budget must lie in [1, grid_size]");
  require(weight >= 0, "weight must be >= 0");
  require(trials >= 1, "trials must be >= 1");
  require(measurement_noise > 0, "measurement_noise must be > 0");
  require(process_noise >= 0, "process_noise must be >= 0");
  require(initial_displacement_variance >= 0 && initial_velocity_variance >= 0,
          "initial variances must be >= 0");
  require(threads >= 0, "threads must be >= 0");
  require(!output_dir.empty(), "output_dir must not be empty");
}

ExperimentConfig ParseJsonConfig(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig config;
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) {
      throw ConfigError("config: section " + section + " must be an object");
    }
    for (const auto& [key, value] : body.items()) {
      Scalar scalar;
      if (value.is_number()) {
        scalar = value.get<double>();
      } else if (value.is_boolean()) {
        scalar = value.get<bool>();
      } else if (value.is_string()) {
        scalar = value.get<std::string>();
      } else {
        throw ConfigError("config: " + Key(section, key) + " must be a scalar");
      }
      Apply(config, Key(section, key), scalar);
    }
  }
  return config;
}

ExperimentConfig ParseTomlConfig(std::string_view text) {
  ExperimentConfig config;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view content = Trim(raw);
    if (content.empty() || content.front() == '#') continue;
    if (content.front() == '[') {
      const auto close = content.find(']');
      if (close == std::string_view::npos) {
        throw ConfigError("config line " + std::to_string(line) + ": bad section header");
      }
      section = std::string(Trim(content.substr(1, close - 1)));
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string_view::npos || section.empty()) {
      throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key(Trim(content.substr(0, eq)));
    Apply(config, Key(section, key), ParseTomlValue(Trim(content.substr(eq + 1)), line));
  }
  return config;
}

std::string ConfigToJson(const ExperimentConfig& c) {
  nlohmann::ordered_json doc;
  doc["beam"] = {{"length_m", c.length_m},
                 {"width_m", c.width_m},
                 {"thickness_m", c.thickness_m},
                 {"elastic_modulus_pa", c.elastic_modulus_pa},
                 {"density_kg_m3", c.density_kg_m3},
                 {"grid_size", c.grid_size}};
  doc["modes"] = {{"n_modes", c.n_modes}};
  doc["scan"] = {{"min_modes", c.scan_min_modes}, {"max_modes", c.scan_max_modes}};
  doc["gramian"] = {{"horizon_periods", c.horizon_periods},
                    {"steps_per_period", c.steps_per_period},
                    {"epsilon", c.epsilon}};
  doc["place"] = {{"n_modes", c.place_modes},
                  {"budget", c.budget},
                  {"sweep_max_budget", c.sweep_max_budget},
                  {"weight", c.weight}};
  doc["estimate"] = {{"n_modes", c.estimate_modes},
                     {"steps_per_period", c.estimate_steps_per_period},
                     {"trials", c.trials},
                     {"measurement_noise", c.measurement_noise},
                     {"process_noise", c.process_noise},
                     {"initial_displacement_variance", c.initial_displacement_variance},
                     {"initial_velocity_variance", c.initial_velocity_variance},
                     {"truth_tip_deflection_m", c.truth_tip_deflection_m}};
  doc["run"] = {{"seed", c.seed},
                {"system", std::string(ToString(c.system))},
                {"format", c.format == TableFormat::kCsv ? "csv" : "json"},
                {"output_dir", c.output_dir},
                {"threads", c.threads}};
  return doc.dump(2) + "\n";
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string ext = path.extension().string();
  ExperimentConfig config;
  if (ext == ".json") {
    config = ParseJsonConfig(buffer.str());
  } else if (ext == ".toml") {
    config = ParseTomlConfig(buffer.str());
  } else {
    throw ConfigError("config: unsupported extension '" + ext + "'");
  }
  config.Validate();
  return config;
}

}  // namespace beamobs
