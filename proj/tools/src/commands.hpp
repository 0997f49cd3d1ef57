#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace frobenius::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "FROBENIUS_OUT_DIR";

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> threads;
  std::ostream* out_stream = nullptr;  ///< progress and summaries; stdout when null
  std::ostream* err_stream = nullptr;  ///< diagnostics; stderr when null
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunResult {
  std::string scenario;
  std::vector<CheckResult> checks;
  std::vector<std::filesystem::path> artifacts;
  double seconds = 0.0;

  bool pass() const;
};

/// --out, then output.dir from the scenario, then $FROBENIUS_OUT_DIR/<name>,
/// then frobenius-out/<name>.
std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg, const RunOptions& opts);

/// Runs every applicable check and writes reports. Throws ConfigError.
RunResult run_verify(ScenarioConfig cfg, const RunOptions& opts);

struct TrajectoryOverrides {
  std::optional<double> q0;
  std::optional<double> p0;
  std::optional<double> t0;
  std::optional<double> t_end;
};

int cmd_verify(const std::filesystem::path& config, const RunOptions& opts);
int cmd_trajectory(const std::filesystem::path& config, const TrajectoryOverrides& init,
                   const RunOptions& opts);
int cmd_scan(const std::filesystem::path& config, const RunOptions& opts);

}  // namespace frobenius::cli
