#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "beamobs/config.h"
#include "beamobs/errors.h"
#include "beamobs/io.h"
#include "beamobs/svg.h"
#include "json.hpp"

namespace beamobs {
namespace {

namespace fs = std::filesystem;

TEST(Config, DefaultsAreValid) {
  const ExperimentConfig config;
  EXPECT_NO_THROW(config.Validate());
  EXPECT_EQ(config.n_modes, 10);
  EXPECT_EQ(config.place_modes, 8);
  EXPECT_EQ(config.budget, 10);
  EXPECT_DOUBLE_EQ(config.weight, 5.0);
  EXPECT_NEAR(config.Beam().half_height(), 0.0025, 1e-15);
}

TEST(Config, ParsesToml) {
  const ExperimentConfig config = ParseTomlConfig(R"(
# comment
[beam]
length_m = 1.5   # trailing comment
grid_size = 1_001

[place]
budget = 4
weight = 0.0

[run]
seed = 42
system = "continuum"
format = 'json'
output_dir = "some dir"
)");
  EXPECT_DOUBLE_EQ(config.length_m, 1.5);
  EXPECT_EQ(config.grid_size, 1001);
  EXPECT_EQ(config.budget, 4);
  EXPECT_DOUBLE_EQ(config.weight, 0.0);
  EXPECT_EQ(config.seed, 42u);
  EXPECT_EQ(config.system, SystemVariant::kContinuum);
  EXPECT_EQ(config.format, TableFormat::kJson);
  EXPECT_EQ(config.output_dir, "some dir");
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ParseTomlConfig("[beam]\nlenght_m = 2\n"), ConfigError);
  EXPECT_THROW(ParseTomlConfig("[nosuch]\nx = 1\n"), ConfigError);
  EXPECT_THROW(ParseTomlConfig("[beam]\nlength_m = abc\n"), ConfigError);
  EXPECT_THROW(ParseTomlConfig("[run]\nsystem = \"hybrid\"\n"), ConfigError);
  EXPECT_THROW(ParseJsonConfig(R"({"beam": {"bogus": 1}})"), ConfigError);
  EXPECT_THROW(ParseJsonConfig("{not json"), ConfigError);
}

TEST(Config, ValidationCatchesInconsistentSettings) {
  ExperimentConfig config;
  config.length_m = -1.0;
  EXPECT_THROW(config.Validate(), ConfigError);
  config = {};
  config.n_modes = 61;
  EXPECT_THROW(config.Validate(), ConfigError);
  config = {};
  config.grid_size = 50;
  EXPECT_THROW(config.Validate(), ConfigError);
  config = {};
  config.scan_min_modes = 5;
  config.scan_max_modes = 3;
  EXPECT_THROW(config.Validate(), ConfigError);
  config = {};
  config.budget = 0;
  EXPECT_THROW(config.Validate(), ConfigError);
  config = {};
  config.weight = -1.0;
  EXPECT_THROW(config.Validate(), ConfigError);
  config = {};
  config.trials = 0;
  EXPECT_THROW(config.Validate(), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig config;
  config.seed = 7;
  config.epsilon = 3e-5;
  config.system = SystemVariant::kTruncated;
  config.output_dir = "x/y";
  const ExperimentConfig back = ParseJsonConfig(ConfigToJson(config));
  EXPECT_EQ(back.seed, 7u);
  EXPECT_DOUBLE_EQ(back.epsilon, 3e-5);
  EXPECT_EQ(back.system, SystemVariant::kTruncated);
  EXPECT_EQ(back.output_dir, "x/y");
  EXPECT_EQ(ConfigToJson(back), ConfigToJson(config));
}

TEST(Config, ShippedConfigLoads) {
  const ExperimentConfig config = LoadConfig(fs::path(BEAMOBS_CONFIG_DIR) / "paper-repro.toml");
  EXPECT_DOUBLE_EQ(config.elastic_modulus_pa, 70e9);
  EXPECT_DOUBLE_EQ(config.density_kg_m3, 2700.0);
  EXPECT_EQ(config.grid_size, 501);
  EXPECT_EQ(config.sweep_max_budget, 50);
  EXPECT_THROW(LoadConfig("/nonexistent/config.toml"), ConfigError);
  EXPECT_THROW(LoadConfig(fs::path(BEAMOBS_CONFIG_DIR) / "paper-repro.yaml"), ConfigError);
}

TEST(Config, EnumNames) {
  EXPECT_EQ(ParseSystemVariant("truncated"), SystemVariant::kTruncated);
  EXPECT_EQ(ParseSystemVariant("both"), SystemVariant::kBoth);
  EXPECT_EQ(ToString(SystemVariant::kContinuum), "continuum");
  EXPECT_EQ(ParseTableFormat("csv"), TableFormat::kCsv);
  EXPECT_THROW(ParseTableFormat("xml"), ConfigError);
}

TEST(Io, NumbersRoundTripAtFullPrecision) {
  for (double v : {0.1, 1.0 / 3.0, 6.4600744531e-7, -2.5e300, 4.9e-324}) {
    EXPECT_EQ(std::strtod(FormatNumber(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(FormatNumber(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(FormatNumber(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(FormatNumber(std::nan("")), "nan");
}

Table SampleTable() {
  Table table;
  table.AddColumn("x", Eigen::Vector3d(0.0, 0.5, 1.0));
  table.AddColumn("y", Eigen::Vector3d(1.0 / 3.0, std::numeric_limits<double>::infinity(), -2.0));
  table.metadata["kind"] = "demo";
  return table;
}

TEST(Io, CsvLayout) {
  const std::string csv = ToCsv(SampleTable());
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# kind: demo");
  std::getline(in, line);
  EXPECT_EQ(line, "x,y");
  std::getline(in, line);
  EXPECT_EQ(line, "0,0.33333333333333331");
  std::getline(in, line);
  EXPECT_EQ(line, "0.5,inf");
  Table bad = SampleTable();
  EXPECT_THROW(bad.AddColumn("z", Eigen::Vector2d(1, 2)), std::invalid_argument);
}

TEST(Io, JsonLayout) {
  const auto doc = nlohmann::json::parse(ToJson(SampleTable()));
  EXPECT_EQ(doc["metadata"]["kind"], "demo");
  EXPECT_EQ(doc["columns"].size(), 2u);
  EXPECT_EQ(doc["data"]["x"].size(), 3u);
  EXPECT_DOUBLE_EQ(doc["data"]["y"][0].get<double>(), 1.0 / 3.0);
}

TEST(Io, WritesFilesAndGramianMetadata) {
  const fs::path dir = fs::temp_directory_path() / "beamobs_io_test";
  fs::remove_all(dir);
  Gramian g;
  g.matrix = Eigen::Matrix2d{{2.0, 0.5}, {0.5, 1.0}};
  g.kind = GramianKind::kContinuumEmpirical;
  g.sensor_locations = {0.25};
  g.horizon = 0.97;
  g.epsilon = 1e-4;
  g.num_modes = 8;
  const Table table = GramianTable(g);
  EXPECT_EQ(table.columns, (std::vector<std::string>{"w0", "w1"}));
  EXPECT_EQ(table.metadata.at("kind"), "continuum-empirical");
  EXPECT_EQ(table.metadata.at("n_modes"), "8");
  EXPECT_EQ(table.metadata.at("epsilon"), "0.0001");
  const fs::path csv = WriteTable(table, dir, "gramian", TableFormat::kCsv);
  const fs::path json = WriteTable(table, dir, "gramian", TableFormat::kJson);
  EXPECT_EQ(csv.filename(), "gramian.csv");
  EXPECT_TRUE(fs::exists(csv));
  EXPECT_TRUE(fs::exists(json));
  std::ifstream in(csv);
  std::stringstream content;
  content << in.rdbuf();
  EXPECT_EQ(content.str(), ToCsv(table));
  fs::remove_all(dir);
}

TEST(Svg, RendersSeriesAndSkipsInvalidPoints) {
  PlotSeries s1{"first", {1, 2, 3, 4}, {1, 10, std::nan(""), 1000}, false};
  PlotSeries s2{"second", {1, 2, 3}, {5, -1, 50}, true};
  PlotSpec spec;
  spec.title = "demo & test";
  spec.x_label = "x";
  spec.y_label = "y";
  spec.log_y = true;
  const std::vector<PlotSeries> series = {s1, s2};
  const std::string svg = RenderPlot(spec, series);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("first"), std::string::npos);
  EXPECT_NE(svg.find("second"), std::string::npos);
  EXPECT_NE(svg.find("demo &amp; test"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(RenderPlot(spec, series), svg);
}

}  // namespace
}  // namespace beamobs
