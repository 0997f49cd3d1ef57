#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <fmt/format.h>
#include <json.hpp>

#include "reports.hpp"

namespace frobenius::cli {

namespace fs = std::filesystem;
using nlohmann::json;

bool RunResult::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return !checks.empty();
}

fs::path resolve_output_dir(const ScenarioConfig& cfg, const RunOptions& opts) {
  if (opts.out) return *opts.out;
  if (cfg.output_dir) return *cfg.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return fs::path(env) / cfg.name;
  return fs::path("frobenius-out") / cfg.name;
}

namespace {

std::ostream& out_of(const RunOptions& o) { return o.out_stream ? *o.out_stream : std::cout; }
std::ostream& err_of(const RunOptions& o) { return o.err_stream ? *o.err_stream : std::cerr; }

void apply_overrides(ScenarioConfig& cfg, const RunOptions& opts) {
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.threads) cfg.threads = *opts.threads;
}

fs::path prepare_dir(const ScenarioConfig& cfg, const RunOptions& opts) {
  const fs::path dir = resolve_output_dir(cfg, opts);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output.dir", 0, "cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

json residual_json(const ResidualReport& r) {
  json j{{"included", r.included},     {"excluded", r.excluded}, {"max_abs", r.max_abs},
         {"mean_abs", r.mean_abs},     {"threshold", r.threshold}, {"pass", r.pass}};
  json q = json::object();
  for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
    q[fmt::format("{:g}", kQuantileLevels[i])] = r.quantiles[i];
  }
  j["quantiles"] = q;
  j["grid"] = {{"q", {r.grid.q.lo, r.grid.q.hi, r.grid.q.count}},
               {"p", {r.grid.p.lo, r.grid.p.hi, r.grid.p.count}},
               {"t", {r.grid.t.lo, r.grid.t.hi, r.grid.t.count}}};
  if (r.cross_check) {
    j["cross_check"] = {{"points", r.cross_check->points},
                        {"step", r.cross_check->step},
                        {"max_scaled_diff", r.cross_check->max_abs_diff},
                        {"threshold", r.cross_check->threshold},
                        {"pass", r.cross_check->pass}};
  }
  return j;
}

void write_residual_csv(const fs::path& path, const ResidualReport& r) {
  CsvWriter csv(path, {"q", "p", "t", "residual", "included"});
  for (const auto& pt : r.points) {
    csv.row({pt.x.q, pt.x.p, pt.x.t, pt.residual, pt.included ? 1.0 : 0.0});
  }
}

bool enabled(const std::optional<bool>& flag, bool applicable, const char* field,
             const std::string& family) {
  if (flag && *flag && !applicable) {
    throw ConfigError(field, 0, "check does not apply to family '" + family + "'");
  }
  return flag.value_or(applicable);
}

// Runs one check, turning numeric failures into a failed result.
template <class Fn>
void run_check(RunResult& result, const std::string& name, json& checks, Fn&& fn) {
  CheckResult c{name, false, ""};
  json j;
  try {
    fn(c, j);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    c.pass = false;
    c.detail = e.what();
    j["error"] = e.what();
  }
  j["pass"] = c.pass;
  checks[name] = j;
  result.checks.push_back(std::move(c));
}

std::string summary_text(const RunResult& r) {
  std::string s = fmt::format("scenario {}\n", r.scenario);
  for (const auto& c : r.checks) {
    s += fmt::format("  {:<12} {}  {}\n", c.name, c.pass ? "PASS" : "FAIL", c.detail);
  }
  s += fmt::format("overall {}\n", r.pass() ? "PASS" : "FAIL");
  return s;
}

}  // namespace

RunResult run_verify(ScenarioConfig cfg, const RunOptions& opts) {
  apply_overrides(cfg, opts);
  const auto start = std::chrono::steady_clock::now();
  const FamilyInstance fam = build_family(cfg);
  const fs::path dir = prepare_dir(cfg, opts);
  const std::string family = std::string(to_string(cfg.family));

  RunResult result;
  result.scenario = cfg.name;
  json checks = json::object();

  run_check(result, "residual", checks, [&](CheckResult& c, json& j) {
    ScanOptions so;
    so.threads = cfg.threads;
    so.cross_check = cfg.checks.cross_check;
    so.seed = cfg.seed;
    const ResidualReport r = residual_scan(fam, cfg.grid, cfg.thresholds.residual, so);
    write_residual_csv(dir / "residual.csv", r);
    result.artifacts.push_back(dir / "residual.csv");
    c.pass = r.pass && (!r.cross_check || r.cross_check->pass);
    c.detail = fmt::format("max={} mean={} threshold={} excluded={}", format_number(r.max_abs),
                           format_number(r.mean_abs), format_number(r.threshold), r.excluded);
    if (r.cross_check) {
      c.detail += fmt::format(" fd_diff={}", format_number(r.cross_check->max_abs_diff));
    }
    j = residual_json(r);
  });

  if (enabled(cfg.checks.drift, fam.invariant.has_value(), "checks.drift", family)) {
    run_check(result, "drift", checks, [&](CheckResult& c, json& j) {
      const auto inits =
          sample_states(fam.invariant_guard(), cfg.sampling, cfg.drift_samples, cfg.seed);
      const DriftReport r =
          drift_check(fam, inits, cfg.t_end, cfg.integrator, cfg.thresholds.drift, cfg.threads);
      CsvWriter csv(dir / "drift.csv", {"trajectory", "t", "I", "drift_rel"});
      std::size_t truncated = 0;
      json per = json::array();
      for (std::size_t i = 0; i < r.series.size(); ++i) {
        const auto& s = r.series[i];
        for (std::size_t k = 0; k < s.t.size(); ++k) {
          csv.row({static_cast<double>(i), s.t[k], s.invariant[k], s.drift[k]});
        }
        truncated += s.guard_exit ? 1 : 0;
        per.push_back({{"q0", s.init.q},
                       {"p0", s.init.p},
                       {"t0", s.init.t},
                       {"t_final", s.t.back()},
                       {"max_drift", s.max_drift},
                       {"guard_exit", s.guard_exit},
                       {"exit_reason", s.exit_reason}});
      }
      result.artifacts.push_back(dir / "drift.csv");
      c.pass = r.pass;
      c.detail = fmt::format("max={} threshold={} trajectories={} truncated={}",
                             format_number(r.max_drift), format_number(r.threshold),
                             r.series.size(), truncated);
      j = {{"max_drift", r.max_drift}, {"threshold", r.threshold}, {"trajectories", per}};
    });
  }

  if (enabled(cfg.checks.reduction, fam.reduction.has_value(), "checks.reduction", family)) {
    run_check(result, "reduction", checks, [&](CheckResult& c, json& j) {
      IntegratorConfig ic = cfg.integrator;
      ic.dense_output = true;
      CsvWriter csv(dir / "reduction.csv", {"trajectory", "t", "f", "dfdt", "rate", "residual"});
      double worst = 0.0;
      bool pass = true;
      json per = json::array();
      for (std::size_t i = 0; i < cfg.reduction_inits.size(); ++i) {
        const PhaseState& init = cfg.reduction_inits[i];
        if (auto bad = (fam.potential.guard() & fam.reduction->f.guard()).violation(init)) {
          throw ConfigError("reduction.inits", 0, "initial state outside the guard (" + *bad + ")");
        }
        const Trajectory traj =
            integrate(fam.potential, init, cfg.t_end, ic, {}, &fam.reduction->f.guard());
        const ReductionReport r = riccati_consistency(fam, traj, cfg.thresholds.reduction);
        for (const auto& pt : r.points) {
          csv.row({static_cast<double>(i), pt.t, pt.f, pt.dfdt, pt.rate, pt.residual});
        }
        worst = std::max(worst, r.max_residual);
        pass = pass && r.pass;
        per.push_back({{"max_residual", r.max_residual},
                       {"points", r.points.size()},
                       {"truncated", r.truncated}});
      }
      result.artifacts.push_back(dir / "reduction.csv");
      c.pass = pass;
      c.detail = fmt::format("{} max={} threshold={}", fam.reduction->name, format_number(worst),
                             format_number(cfg.thresholds.reduction));
      j = {{"function", fam.reduction->name},
           {"max_residual", worst},
           {"threshold", cfg.thresholds.reduction},
           {"trajectories", per}};
    });
  }

  if (enabled(cfg.checks.abel, fam.abel.has_value(), "checks.abel", family)) {
    run_check(result, "abel", checks, [&](CheckResult& c, json& j) {
      const AbelReport r =
          abel_characteristic_check(fam, cfg.abel.t, cfg.abel.q_bar_lo, cfg.abel.q_bar_hi,
                                    cfg.thresholds.abel, cfg.abel.p_bar, cfg.abel.samples);
      CsvWriter csv(dir / "abel.csv", {"q_bar", "p_bar", "traced", "predicted", "error"});
      for (const auto& pt : r.points) {
        csv.row({pt.q_bar, pt.p_bar, pt.traced, pt.predicted, pt.error});
      }
      result.artifacts.push_back(dir / "abel.csv");
      c.pass = r.pass;
      c.detail = fmt::format("max={} threshold={} points={} excluded={}",
                             format_number(r.max_error), format_number(r.threshold),
                             r.points.size(), r.excluded);
      j = {{"t", r.t_fixed},
           {"max_error", r.max_error},
           {"threshold", r.threshold},
           {"points", r.points.size()},
           {"excluded", r.excluded}};
    });
  }

  if (enabled(cfg.checks.aux, !fam.time_quadratures.empty(), "checks.aux", family)) {
    run_check(result, "aux", checks, [&](CheckResult& c, json& j) {
      const PhaseState init = cfg.trajectory_init;
      const auto odes = fam.aux_odes(init.t);
      const Trajectory traj =
          integrate(fam.potential, init, cfg.trajectory_t_end, cfg.integrator, odes);
      const AuxAgreementReport r = aux_agreement(fam, traj, cfg.thresholds.aux);
      std::vector<std::string> header{"t"};
      for (const auto& name : r.names) {
        header.push_back(name + "_ode");
        header.push_back(name + "_quad");
      }
      CsvWriter csv(dir / "aux.csv", header);
      for (std::size_t s = 0; s < traj.samples.size(); ++s) {
        std::vector<double> row{traj.samples[s].t};
        for (std::size_t k = 0; k < fam.time_quadratures.size(); ++k) {
          row.push_back(traj.aux[s][k]);
          row.push_back(fam.time_quadratures[k].pointwise(traj.samples[s].t));
        }
        csv.row(row);
      }
      result.artifacts.push_back(dir / "aux.csv");
      c.pass = r.pass;
      c.detail =
          fmt::format("max={} threshold={}", format_number(r.max_abs), format_number(r.threshold));
      json per = json::object();
      for (std::size_t k = 0; k < r.names.size(); ++k) per[r.names[k]] = r.max_abs_diff[k];
      j = {{"max_abs_diff", per}, {"threshold", r.threshold}};
    });
  }

  if (cfg.checks.inverse) {
    if (!fam.invariant) {
      throw ConfigError("checks.inverse", 0, "family '" + family + "' has no closed-form invariant");
    }
    run_check(result, "inverse", checks, [&](CheckResult& c, json& j) {
      const ScalarField built = compatible_from_invariant(*fam.invariant);
      const SampleBox box{cfg.grid.q, cfg.grid.p, cfg.grid.t};
      const auto samples = sample_states(fam.potential.guard() & built.guard(), box,
                                         cfg.inverse_samples, cfg.seed);
      const InverseReport r =
          inverse_roundtrip(fam.potential, *fam.invariant, samples, cfg.thresholds.inverse);
      c.pass = r.pass;
      c.detail = fmt::format("residual={} tangency={} threshold={} samples={}",
                             format_number(r.max_residual), format_number(r.max_tangency),
                             format_number(r.threshold), r.included);
      j = {{"max_residual", r.max_residual},
           {"max_tangency", r.max_tangency},
           {"threshold", r.threshold},
           {"included", r.included},
           {"excluded", r.excluded}};
    });
  }

  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const json summary{{"scenario", cfg.name},     {"family", family},
                     {"seed", cfg.seed},         {"pass", result.pass()},
                     {"checks", checks},         {"wall_seconds", result.seconds}};
  {
    std::ofstream js(dir / "summary.json", std::ios::binary | std::ios::trunc);
    js << summary.dump(2) << '\n';
    std::ofstream txt(dir / "summary.txt", std::ios::binary | std::ios::trunc);
    txt << summary_text(result);
  }
  result.artifacts.push_back(dir / "summary.json");
  result.artifacts.push_back(dir / "summary.txt");
  return result;
}

int cmd_verify(const fs::path& config, const RunOptions& opts) {
  try {
    const ScenarioConfig cfg = load_scenario(config);
    const RunResult r = run_verify(cfg, opts);
    out_of(opts) << summary_text(r)
                 << fmt::format("reports in {}\n", resolve_output_dir(cfg, opts).string());
    return r.pass() ? kExitPass : kExitFail;
  } catch (const ConfigError& e) {
    err_of(opts) << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_trajectory(const fs::path& config, const TrajectoryOverrides& init,
                   const RunOptions& opts) {
  try {
    ScenarioConfig cfg = load_scenario(config);
    apply_overrides(cfg, opts);
    PhaseState x0 = cfg.trajectory_init;
    if (init.q0) x0.q = *init.q0;
    if (init.p0) x0.p = *init.p0;
    if (init.t0) x0.t = *init.t0;
    const double t_end = init.t_end.value_or(cfg.trajectory_t_end);
    if (!x0.finite() || !(t_end > x0.t)) {
      throw ConfigError("trajectory", 0, "need finite initial state and t_end > t0");
    }
    const FamilyInstance fam = build_family(cfg);
    const Guard guard = fam.invariant_guard();
    if (auto bad = guard.violation(x0)) {
      throw ConfigError("trajectory", 0, "initial state outside the guard (" + *bad + ")");
    }
    const fs::path dir = prepare_dir(cfg, opts);

    const auto odes = fam.aux_odes(x0.t);
    const Trajectory traj = integrate(fam.potential, x0, t_end, cfg.integrator, odes,
                                      fam.invariant ? &fam.invariant->guard() : nullptr);

    std::vector<std::string> header{"t", "q", "p"};
    if (fam.invariant) {
      header.push_back("I");
      header.push_back("drift_rel");
    }
    for (const auto& name : traj.aux_names) header.push_back(name);
    CsvWriter csv(dir / "trajectory.csv", header);
    const double i0 = fam.invariant ? fam.invariant->value(x0) : 0.0;
    for (std::size_t s = 0; s < traj.samples.size(); ++s) {
      const PhaseState& x = traj.samples[s];
      std::vector<double> row{x.t, x.q, x.p};
      if (fam.invariant) {
        const double v = fam.invariant->value(x);
        row.push_back(v);
        row.push_back(std::abs(v - i0) / std::max(1.0, std::abs(i0)));
      }
      row.insert(row.end(), traj.aux[s].begin(), traj.aux[s].end());
      csv.row(row);
    }
    const PhaseState& last = traj.back();
    out_of(opts) << fmt::format("trajectory {} steps={} rejected={} final t={} q={} p={}{}\n",
                                cfg.name, traj.accepted_steps, traj.rejected_steps,
                                format_number(last.t), format_number(last.q),
                                format_number(last.p),
                                traj.guard_exit ? " (guard exit: " + traj.exit_reason + ")" : "");
    out_of(opts) << fmt::format("wrote {}\n", (dir / "trajectory.csv").string());
    return kExitPass;
  } catch (const ConfigError& e) {
    err_of(opts) << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err_of(opts) << "trajectory: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err_of(opts) << "trajectory: " << e.what() << '\n';
    return kExitFail;
  }
}

int cmd_scan(const fs::path& config, const RunOptions& opts) {
  try {
    ScenarioConfig cfg = load_scenario(config);
    apply_overrides(cfg, opts);
    const FamilyInstance fam = build_family(cfg);
    const fs::path dir = prepare_dir(cfg, opts);
    ScanOptions so;
    so.threads = cfg.threads;
    so.seed = cfg.seed;
    const ResidualReport r = residual_scan(fam, cfg.grid, cfg.thresholds.residual, so);
    write_residual_csv(dir / "residual.csv", r);
    out_of(opts) << fmt::format("scan {} max={} mean={} included={} excluded={} threshold={} {}\n",
                                cfg.name, format_number(r.max_abs), format_number(r.mean_abs),
                                r.included, r.excluded, format_number(r.threshold),
                                r.pass ? "PASS" : "FAIL");
    return r.pass ? kExitPass : kExitFail;
  } catch (const ConfigError& e) {
    err_of(opts) << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err_of(opts) << "scan: " << e.what() << '\n';
    return kExitFail;
  }
}

}  // namespace frobenius::cli
