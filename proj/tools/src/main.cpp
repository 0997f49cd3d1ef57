#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace frobenius::cli;

  CLI::App app{"Compatible vector fields and invariants for 1D time-dependent Hamiltonians"};
  app.require_subcommand(1);

  RunOptions opts;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the scenario)");
  auto* out_opt = app.add_option("--out", out,
                                 "Output directory (default: scenario output.dir, then $" +
                                     std::string(kOutputDirEnv) + "/<name>)");
  auto* threads_opt =
      app.add_option("--threads", threads, "Worker threads for scans and trajectories")
          ->check(CLI::PositiveNumber);

  std::string config;
  auto* verify = app.add_subcommand("verify", "Run every applicable check and write reports");
  verify->add_option("config", config, "Scenario file")->required();

  auto* scan = app.add_subcommand("scan", "Residual scan of the basic equation over the grid");
  scan->add_option("config", config, "Scenario file")->required();

  TrajectoryOverrides init;
  auto* traj = app.add_subcommand("trajectory", "Integrate one trajectory and dump it as CSV");
  traj->add_option("config", config, "Scenario file")->required();
  traj->add_option("--q0", init.q0, "Initial position");
  traj->add_option("--p0", init.p0, "Initial momentum");
  traj->add_option("--t0", init.t0, "Initial time");
  traj->add_option("--t-end", init.t_end, "Final time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out = out;
  if (*threads_opt) opts.threads = threads;

  if (*verify) return cmd_verify(config, opts);
  if (*scan) return cmd_scan(config, opts);
  return cmd_trajectory(config, init, opts);
}
