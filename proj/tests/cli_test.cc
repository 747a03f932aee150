#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

int RunCli(const std::string& args) {
  const std::string command = std::string(BEAMOBS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("beamobs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "small.toml") << R"([beam]
grid_size = 121
[modes]
n_modes = 3
[scan]
min_modes = 2
max_modes = 3
[gramian]
steps_per_period = 400
[place]
n_modes = 2
budget = 3
sweep_max_budget = 4
[estimate]
n_modes = 2
steps_per_period = 200
trials = 2
)";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Args(const std::string& sub, const std::string& out) const {
    return sub + " --config " + (dir_ / "small.toml").string() + " --out " + (dir_ / out).string();
  }

  fs::path dir_;
};

TEST_F(CliTest, BadInputsExitWithTwo) {
  EXPECT_EQ(RunCli(""), 2);
  EXPECT_EQ(RunCli("frobnicate"), 2);
  EXPECT_EQ(RunCli("modes --no-such-flag"), 2);
  EXPECT_EQ(RunCli("modes --config /nonexistent.toml"), 2);
  EXPECT_EQ(RunCli("modes --modes 0"), 2);
  EXPECT_EQ(RunCli("scan --system sideways"), 2);
  std::ofstream(dir_ / "bad.toml") << "[beam]\nlength_m = -2\n";
  EXPECT_EQ(RunCli("modes --config " + (dir_ / "bad.toml").string()), 2);
  std::ofstream(dir_ / "typo.toml") << "[beam]\nlenght_m = 2\n";
  EXPECT_EQ(RunCli("modes --config " + (dir_ / "typo.toml").string()), 2);
}

TEST_F(CliTest, ModesWritesTablesAndPlots) {
  ASSERT_EQ(RunCli(Args("modes", "m")), 0);
  EXPECT_TRUE(fs::exists(dir_ / "m" / "roots.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "m" / "modes.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "m" / "curvatures.csv"));
  const std::string roots = Slurp(dir_ / "m" / "roots.csv");
  EXPECT_NE(roots.find("1.87510406871"), std::string::npos);
  ASSERT_EQ(RunCli(Args("modes", "j") + " --format json"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "j" / "roots.json"));
}

TEST_F(CliTest, ScanAndPlaceProduceOutputs) {
  ASSERT_EQ(RunCli(Args("scan", "s") + " --system continuum"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "scan_continuum.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "s" / "scan_truncated.csv"));
  ASSERT_EQ(RunCli(Args("place", "p") + " --system truncated"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "p" / "placement_truncated.json"));
}

TEST_F(CliTest, EstimateIsReproducible) {
  ASSERT_EQ(RunCli(Args("estimate", "a") + " --seed 3"), 0);
  ASSERT_EQ(RunCli(Args("estimate", "b") + " --seed 3"), 0);
  const std::string a = Slurp(dir_ / "a" / "trace_comparison.csv");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, Slurp(dir_ / "b" / "trace_comparison.csv"));
  EXPECT_EQ(Slurp(dir_ / "a" / "estimate_summary.json"),
            Slurp(dir_ / "b" / "estimate_summary.json"));
}

}  // namespace
