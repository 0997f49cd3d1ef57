#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace frobenius;
using namespace frobenius::cli;

namespace {

const fs::path kScenarios = FROBENIUS_SCENARIO_DIR;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / "frobenius-cli-tests" / info->name();
    fs::remove_all(root_);
    fs::create_directories(root_);
    opts_.out_stream = &out_;
    opts_.err_stream = &err_;
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = root_ / name;
    std::ofstream(p) << text;
    return p;
  }
  RunOptions at(const fs::path& dir) {
    RunOptions o = opts_;
    o.out = dir;
    return o;
  }

  fs::path root_;
  std::ostringstream out_;
  std::ostringstream err_;
  RunOptions opts_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) {
    header->clear();
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) header->push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  ADD_FAILURE() << "missing column " << name;
  return 0;
}

const char* kFreeParticle = R"(name: free
family: forced_oscillator
window: [0, 2]
functions:
  rho: {kind: constant, params: [1]}
trajectory: {q0: 0, p0: 1, t0: 0, t_end: 2}
)";

}  // namespace

TEST_F(CliTest, ForcedOscillatorScenarioPasses) {
  const fs::path dir = root_ / "out";
  EXPECT_EQ(cmd_verify(kScenarios / "forced_oscillator.yaml", at(dir)), kExitPass) << err_.str();
  std::vector<std::string> header;
  const auto rows = read_csv(dir / "drift.csv", &header);
  ASSERT_FALSE(rows.empty());
  const std::size_t d = column(header, "drift_rel");
  for (const auto& r : rows) EXPECT_LT(r[d], 1e-8);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_TRUE(summary["pass"].get<bool>());
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
  EXPECT_TRUE(fs::exists(dir / "residual.csv"));
}

TEST_F(CliTest, AbelZeroKIsConfigError) {
  EXPECT_EQ(cmd_verify(kScenarios / "abel_invalid_k.yaml", at(root_ / "out")), kExitConfig);
  EXPECT_NE(err_.str().find("field 'k'"), std::string::npos) << err_.str();
}

TEST_F(CliTest, UnreachableThresholdFails) {
  const auto cfg = write("tight.yaml", R"(name: tight
family: quadratic
window: [0, 1]
functions:
  rho: {kind: constant, params: [1]}
  U: {kind: polynomial, params: [0, 0, 0, 0, 1]}
sampling: {q: [-1, 1], p: [-1, 1], t: [0, 0], count: 3}
t_end: 1
thresholds: {residual: 1e-15, drift: 1e-15}
)");
  EXPECT_EQ(cmd_verify(cfg, at(root_ / "out")), kExitFail);
  EXPECT_NE(out_.str().find("FAIL"), std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(root_ / "out" / "summary.json"));
  EXPECT_FALSE(summary["pass"].get<bool>());
}

TEST_F(CliTest, PrintedSarletScenarioFails) {
  EXPECT_EQ(cmd_verify(kScenarios / "sarlet_printed.yaml", at(root_ / "out")), kExitFail);
}

TEST_F(CliTest, FreeParticleTrajectory) {
  const fs::path dir = root_ / "out";
  EXPECT_EQ(cmd_trajectory(write("free.yaml", kFreeParticle), {}, at(dir)), kExitPass) << err_.str();
  std::vector<std::string> header;
  const auto rows = read_csv(dir / "trajectory.csv", &header);
  EXPECT_EQ(header, (std::vector<std::string>{"t", "q", "p", "I", "drift_rel"}));
  EXPECT_DOUBLE_EQ(rows.back()[0], 2.0);
  EXPECT_NEAR(rows.back()[1], 2.0, 1e-10);
  EXPECT_NEAR(rows.back()[2], 1.0, 1e-10);
}

TEST_F(CliTest, TrajectoryOverrides) {
  const fs::path dir = root_ / "out";
  TrajectoryOverrides init;
  init.q0 = 1.0;
  init.t_end = 1.0;
  EXPECT_EQ(cmd_trajectory(write("free.yaml", kFreeParticle), init, at(dir)), kExitPass);
  const auto rows = read_csv(dir / "trajectory.csv");
  EXPECT_DOUBLE_EQ(rows.back()[0], 1.0);
  EXPECT_NEAR(rows.back()[1], 2.0, 1e-10);
}

TEST_F(CliTest, CosineAmplitudeInvariantStaysZero) {
  const fs::path dir = root_ / "out";
  EXPECT_EQ(cmd_trajectory(kScenarios / "forced_oscillator.yaml", {}, at(dir)), kExitPass);
  std::vector<std::string> header;
  const auto rows = read_csv(dir / "trajectory.csv", &header);
  const std::size_t i = column(header, "I");
  for (const auto& r : rows) EXPECT_LT(std::abs(r[i]), 1e-8);
}

TEST_F(CliTest, TrajectoryIncludesAuxiliaries) {
  const fs::path dir = root_ / "out";
  EXPECT_EQ(cmd_trajectory(kScenarios / "abel.yaml", {}, at(dir)), kExitPass) << err_.str();
  std::vector<std::string> header;
  read_csv(dir / "trajectory.csv", &header);
  EXPECT_EQ(header[0], "t");
  column(header, "T");
  column(header, "G");
  EXPECT_EQ(std::count(header.begin(), header.end(), "I"), 0);
}

TEST_F(CliTest, LogBranchStartIsRejected) {
  const auto cfg = write("sarlet.yaml", R"(name: log_branch
family: sarlet
window: [0, 1]
functions:
  rho: {kind: constant, params: [1]}
  gamma: {kind: polynomial, params: [1, 0.5]}
trajectory: {q0: -1, p0: 1, t0: 0, t_end: 1}
)");
  EXPECT_EQ(cmd_trajectory(cfg, {}, at(root_ / "out")), kExitConfig);
}

TEST_F(CliTest, ScanOfFreeParticleIsExactlyZero) {
  const fs::path dir = root_ / "out";
  EXPECT_EQ(cmd_scan(write("free.yaml", kFreeParticle), at(dir)), kExitPass);
  std::vector<std::string> header;
  const auto rows = read_csv(dir / "residual.csv", &header);
  EXPECT_EQ(header, (std::vector<std::string>{"q", "p", "t", "residual", "included"}));
  EXPECT_EQ(rows.size(), 1000u);
  for (const auto& r : rows) EXPECT_EQ(r[3], 0.0);
  EXPECT_NE(out_.str().find("max="), std::string::npos);
  EXPECT_NE(out_.str().find("mean="), std::string::npos);
}

TEST_F(CliTest, ScanOfAbelUnitAmplitude) {
  const auto cfg = write("abel.yaml", R"(name: abel_unit
family: abel
window: [0, 1]
k: 1
functions:
  rho: {kind: constant, params: [1]}
  U: {kind: polynomial, params: [0, 0, 0.5]}
)");
  const fs::path dir = root_ / "out";
  EXPECT_EQ(cmd_scan(cfg, at(dir)), kExitPass);
  double worst = 0.0;
  for (const auto& r : read_csv(dir / "residual.csv")) worst = std::max(worst, std::abs(r[3]));
  EXPECT_LT(worst, 1e-6);
}

TEST_F(CliTest, ScanFlagsGuardedPoints) {
  const auto cfg = write("sarlet.yaml", R"(name: straddle
family: sarlet
window: [0, 1]
functions:
  rho: {kind: constant, params: [1]}
  sigma: {kind: constant, params: [0.5]}
  gamma: {kind: polynomial, params: [1, 0.5]}
grid:
  q: {range: [-1, 2], count: 10}
  p: {range: [-2, 2], count: 10}
  t: {range: [0, 1], count: 10}
)");
  const fs::path dir = root_ / "out";
  EXPECT_EQ(cmd_scan(cfg, at(dir)), kExitPass);
  std::size_t excluded = 0;
  for (const auto& r : read_csv(dir / "residual.csv")) {
    if (r[0] < 0.5) {
      EXPECT_EQ(r[4], 0.0);
    }
    excluded += r[4] == 0.0;
  }
  EXPECT_GT(excluded, 0u);
}

TEST_F(CliTest, DegenerateScanFails) {
  const auto cfg = write("sarlet.yaml", R"(name: degenerate
family: sarlet
window: [0, 1]
functions:
  rho: {kind: constant, params: [1]}
  gamma: {kind: polynomial, params: [1, 0.5]}
grid:
  q: {range: [-2, -1], count: 4}
  p: {range: [-2, 2], count: 4}
  t: {range: [0, 1], count: 4}
)");
  EXPECT_EQ(cmd_scan(cfg, at(root_ / "out")), kExitFail);
}

TEST_F(CliTest, MalformedConfigsExitTwo) {
  EXPECT_EQ(cmd_verify(root_ / "missing.yaml", at(root_ / "out")), kExitConfig);
  EXPECT_EQ(cmd_verify(write("bad.yaml", "name: [unclosed\n"), at(root_ / "out")), kExitConfig);
  EXPECT_EQ(cmd_verify(write("unknown.yaml", std::string(kFreeParticle) + "colour: blue\n"),
                       at(root_ / "out")),
            kExitConfig);
  EXPECT_NE(err_.str().find("colour"), std::string::npos);
  EXPECT_EQ(cmd_verify(write("family.yaml", "name: x\nfamily: kepler\n"), at(root_ / "out")),
            kExitConfig);
  EXPECT_EQ(cmd_verify(write("rho.yaml", R"(name: x
family: forced_oscillator
window: [0, 5]
functions:
  rho: {kind: trigonometric, params: [0, 1, 1, 0]}
)"),
                       at(root_ / "out")),
            kExitConfig);
  EXPECT_EQ(cmd_verify(write("threshold.yaml", std::string(kFreeParticle) + "thresholds: {residual: -1}\n"),
                       at(root_ / "out")),
            kExitConfig);
}

TEST_F(CliTest, ConfigErrorsCarryLineNumbers) {
  try {
    parse_scenario("name: x\nfamily: abel\nwindow: [0, 1]\nk: 0\nfunctions:\n  rho: {kind: constant, params: [1]}\n");
    FAIL() << "expected a config error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "k");
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  for (const char* name : {"sarlet.yaml", "abel.yaml", "quadratic.yaml"}) {
    const fs::path a = root_ / "a", b = root_ / "b";
    ASSERT_EQ(cmd_verify(kScenarios / name, at(a)), kExitPass) << name;
    ASSERT_EQ(cmd_verify(kScenarios / name, at(b)), kExitPass) << name;
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename()))
          << name << " " << entry.path().filename();
      ++compared;
    }
    EXPECT_GE(compared, 2u);
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_F(CliTest, SeedChangesSampledStarts) {
  RunOptions o1 = at(root_ / "a"), o2 = at(root_ / "b");
  o2.seed = 7;
  ASSERT_EQ(cmd_verify(kScenarios / "forced_oscillator.yaml", o1), kExitPass);
  ASSERT_EQ(cmd_verify(kScenarios / "forced_oscillator.yaml", o2), kExitPass);
  EXPECT_NE(slurp(root_ / "a" / "drift.csv"), slurp(root_ / "b" / "drift.csv"));
}

TEST_F(CliTest, OutputDirectoryPrecedence) {
  auto cfg = parse_scenario(kFreeParticle);
  RunOptions o;
  ::setenv(kOutputDirEnv, (root_ / "env").c_str(), 1);
  EXPECT_EQ(resolve_output_dir(cfg, o), root_ / "env" / "free");
  cfg.output_dir = root_ / "cfg";
  EXPECT_EQ(resolve_output_dir(cfg, o), root_ / "cfg");
  o.out = root_ / "flag";
  EXPECT_EQ(resolve_output_dir(cfg, o), root_ / "flag");
  ::unsetenv(kOutputDirEnv);
  cfg.output_dir.reset();
  o.out.reset();
  EXPECT_EQ(resolve_output_dir(cfg, o), fs::path("frobenius-out") / "free");
}

TEST_F(CliTest, EveryBundledScenarioParses) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().filename() == "abel_invalid_k.yaml") {
      EXPECT_THROW(load_scenario(entry.path()), ConfigError);
      continue;
    }
    const auto cfg = load_scenario(entry.path());
    EXPECT_NO_THROW(build_family(cfg)) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 9u);
}
