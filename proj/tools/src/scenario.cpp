#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace frobenius::cli {

namespace {

std::string describe(const std::string& field, int line, const std::string& message) {
  std::string out = "config error";
  if (!field.empty()) out += ": field '" + field + "'";
  if (line > 0) out += " (line " + std::to_string(line) + ")";
  return out + ": " + message;
}

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

[[noreturn]] void fail(const std::string& field, const YAML::Node& n, const std::string& msg) {
  throw ConfigError(field, line_of(n), msg);
}

void reject_unknown(const YAML::Node& map, const std::string& field,
                    const std::set<std::string>& allowed) {
  if (!map.IsMap()) fail(field, map, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(join(field, key), kv.first, "unknown key");
  }
}

double as_double(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) fail(field, n, "expected a number");
  double v = 0.0;
  try {
    v = n.as<double>();
  } catch (const YAML::Exception&) {
    fail(field, n, "expected a number, got '" + n.Scalar() + "'");
  }
  if (!std::isfinite(v)) fail(field, n, "must be finite");
  return v;
}

double as_positive(const YAML::Node& n, const std::string& field) {
  const double v = as_double(n, field);
  if (!(v > 0.0)) fail(field, n, "must be positive");
  return v;
}

std::size_t as_count(const YAML::Node& n, const std::string& field, std::size_t min_value = 1) {
  const double v = as_double(n, field);
  if (v != std::floor(v) || v < static_cast<double>(min_value)) {
    fail(field, n, "must be an integer >= " + std::to_string(min_value));
  }
  return static_cast<std::size_t>(v);
}

bool as_bool(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    fail(field, n, "expected true or false");
  }
}

std::string as_string(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) fail(field, n, "expected a string");
  return n.Scalar();
}

std::vector<double> as_list(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence()) fail(field, n, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(as_double(n[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::pair<double, double> as_range(const YAML::Node& n, const std::string& field) {
  const auto v = as_list(n, field);
  if (v.size() != 2) fail(field, n, "expected [lo, hi]");
  if (v[1] < v[0]) fail(field, n, "range is empty (hi < lo)");
  return {v[0], v[1]};
}

FunctionSpec parse_function(const YAML::Node& n, const std::string& field) {
  reject_unknown(n, field, {"kind", "params"});
  if (!n["kind"]) fail(join(field, "kind"), n, "missing");
  if (!n["params"]) fail(join(field, "params"), n, "missing");
  FunctionSpec spec;
  try {
    spec.kind = parse_function_kind(as_string(n["kind"], join(field, "kind")));
  } catch (const ContractError& e) {
    fail(join(field, "kind"), n["kind"], e.what());
  }
  spec.params = as_list(n["params"], join(field, "params"));
  try {
    TimeFunction::make(spec.kind, spec.params);
  } catch (const ContractError& e) {
    fail(join(field, "params"), n["params"], e.what());
  }
  return spec;
}

struct FamilyFunctions {
  std::set<std::string> required;
  std::set<std::string> optional;
};

FamilyFunctions functions_of(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::forced_oscillator: return {{"rho"}, {"force", "v0"}};
    case FamilyKind::sarlet: return {{"rho"}, {"sigma", "gamma", "v0"}};
    case FamilyKind::quadratic: return {{"rho", "U"}, {"sigma", "v0"}};
    case FamilyKind::giacomini: return {{"c2", "W"}, {}};
    case FamilyKind::abel: return {{"rho"}, {"U"}};
    case FamilyKind::inverse: return {{"U"}, {}};
  }
  return {};
}

Axis parse_axis(const YAML::Node& n, const std::string& field) {
  reject_unknown(n, field, {"range", "count"});
  if (!n["range"]) fail(join(field, "range"), n, "missing");
  const auto [lo, hi] = as_range(n["range"], join(field, "range"));
  const std::size_t count = n["count"] ? as_count(n["count"], join(field, "count")) : 10;
  return {lo, hi, count};
}

PhaseState parse_state(const YAML::Node& n, const std::string& field) {
  const auto v = as_list(n, field);
  if (v.size() != 3) fail(field, n, "expected [q, p, t]");
  return {v[0], v[1], v[2]};
}

}  // namespace

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error(describe(field, line, message)), field_(std::move(field)), line_(line) {}

ScenarioConfig parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw ConfigError("", 0, "scenario must be a mapping");
  reject_unknown(root, "",
                 {"name", "family", "window", "functions", "k", "form", "grid", "sampling",
                  "t_end", "integrator", "thresholds", "checks", "reduction", "abel", "inverse",
                  "trajectory", "seed", "threads", "output"});

  ScenarioConfig cfg;
  if (!root["name"]) fail("name", root, "missing");
  cfg.name = as_string(root["name"], "name");
  if (cfg.name.empty()) fail("name", root["name"], "must not be empty");

  if (!root["family"]) fail("family", root, "missing");
  try {
    cfg.family = parse_family_kind(as_string(root["family"], "family"));
  } catch (const ContractError& e) {
    fail("family", root["family"], e.what());
  }

  if (const auto w = root["window"]) {
    const auto v = as_list(w, "window");
    if (v.size() != 2 || !(v[1] > v[0])) fail("window", w, "expected [t0, t1] with t1 > t0");
    cfg.window = {v[0], v[1]};
  }

  const FamilyFunctions allowed = functions_of(cfg.family);
  const YAML::Node fns = root["functions"];
  if (fns) {
    if (!fns.IsMap()) fail("functions", fns, "expected a mapping");
    for (const auto& kv : fns) {
      const auto key = kv.first.as<std::string>();
      const std::string field = "functions." + key;
      if (!allowed.required.count(key) && !allowed.optional.count(key)) {
        fail(field, kv.first,
             "not a parameter of family '" + std::string(to_string(cfg.family)) + "'");
      }
      cfg.functions[key] = parse_function(kv.second, field);
    }
  }
  for (const auto& req : allowed.required) {
    if (!cfg.functions.count(req)) fail("functions." + req, fns ? fns : root, "missing");
  }

  if (const auto k = root["k"]) {
    cfg.k = as_double(k, "k");
    if (cfg.k == 0.0) fail("k", k, "must be nonzero");
  } else if (cfg.family == FamilyKind::abel) {
    fail("k", root, "missing");
  }

  if (const auto f = root["form"]) {
    const auto s = as_string(f, "form");
    if (s == "corrected") cfg.form = SarletForm::corrected;
    else if (s == "printed") cfg.form = SarletForm::printed;
    else fail("form", f, "expected 'corrected' or 'printed'");
  }

  cfg.grid.t = {cfg.window.t0, cfg.window.t1, 10};
  if (const auto g = root["grid"]) {
    reject_unknown(g, "grid", {"q", "p", "t"});
    if (g["q"]) cfg.grid.q = parse_axis(g["q"], "grid.q");
    if (g["p"]) cfg.grid.p = parse_axis(g["p"], "grid.p");
    if (g["t"]) cfg.grid.t = parse_axis(g["t"], "grid.t");
  }

  cfg.sampling.t = {cfg.window.t0, cfg.window.t0, 1};
  if (const auto s = root["sampling"]) {
    reject_unknown(s, "sampling", {"q", "p", "t", "count"});
    auto axis = [&](const char* key, Axis& out) {
      if (!s[key]) return;
      const auto [lo, hi] = as_range(s[key], std::string("sampling.") + key);
      out = {lo, hi, 1};
    };
    axis("q", cfg.sampling.q);
    axis("p", cfg.sampling.p);
    axis("t", cfg.sampling.t);
    if (s["count"]) cfg.drift_samples = as_count(s["count"], "sampling.count");
  }

  cfg.t_end = cfg.window.t1;
  if (const auto t = root["t_end"]) cfg.t_end = as_double(t, "t_end");
  if (!(cfg.t_end > cfg.sampling.t.hi)) {
    fail("t_end", root["t_end"] ? root["t_end"] : root,
         "must exceed the latest sampled initial time");
  }

  if (const auto n = root["integrator"]) {
    reject_unknown(n, "integrator", {"rel_tol", "abs_tol", "max_step", "max_steps"});
    if (n["rel_tol"]) cfg.integrator.rel_tol = as_positive(n["rel_tol"], "integrator.rel_tol");
    if (n["abs_tol"]) cfg.integrator.abs_tol = as_positive(n["abs_tol"], "integrator.abs_tol");
    if (n["max_step"]) cfg.integrator.max_step = as_positive(n["max_step"], "integrator.max_step");
    if (n["max_steps"]) cfg.integrator.max_steps = as_count(n["max_steps"], "integrator.max_steps");
  }

  if (const auto th = root["thresholds"]) {
    reject_unknown(th, "thresholds", {"residual", "drift", "reduction", "abel", "inverse", "aux"});
    auto read = [&](const char* key, double& out) {
      if (th[key]) out = as_positive(th[key], std::string("thresholds.") + key);
    };
    read("residual", cfg.thresholds.residual);
    read("drift", cfg.thresholds.drift);
    read("reduction", cfg.thresholds.reduction);
    read("abel", cfg.thresholds.abel);
    read("inverse", cfg.thresholds.inverse);
    read("aux", cfg.thresholds.aux);
  }

  if (const auto c = root["checks"]) {
    reject_unknown(c, "checks", {"drift", "reduction", "abel", "aux", "inverse", "cross_check"});
    auto read = [&](const char* key, std::optional<bool>& out) {
      if (c[key]) out = as_bool(c[key], std::string("checks.") + key);
    };
    read("drift", cfg.checks.drift);
    read("reduction", cfg.checks.reduction);
    read("abel", cfg.checks.abel);
    read("aux", cfg.checks.aux);
    if (c["inverse"]) cfg.checks.inverse = as_bool(c["inverse"], "checks.inverse");
    if (c["cross_check"]) cfg.checks.cross_check = as_bool(c["cross_check"], "checks.cross_check");
  }

  if (const auto r = root["reduction"]) {
    reject_unknown(r, "reduction", {"inits"});
    if (const auto inits = r["inits"]) {
      if (!inits.IsSequence()) fail("reduction.inits", inits, "expected a list of [q, p, t]");
      for (std::size_t i = 0; i < inits.size(); ++i) {
        cfg.reduction_inits.push_back(
            parse_state(inits[i], "reduction.inits[" + std::to_string(i) + "]"));
      }
    }
  }

  cfg.abel.t = 0.5 * (cfg.window.t0 + cfg.window.t1);
  if (const auto a = root["abel"]) {
    reject_unknown(a, "abel", {"t", "q_bar", "p_bar", "samples"});
    if (a["t"]) {
      cfg.abel.t = as_double(a["t"], "abel.t");
      if (!cfg.window.contains(cfg.abel.t)) fail("abel.t", a["t"], "must lie in the window");
    }
    if (a["q_bar"]) {
      const auto [lo, hi] = as_range(a["q_bar"], "abel.q_bar");
      if (!(hi > lo)) fail("abel.q_bar", a["q_bar"], "range must have hi > lo");
      cfg.abel.q_bar_lo = lo;
      cfg.abel.q_bar_hi = hi;
    }
    if (a["p_bar"]) {
      cfg.abel.p_bar = as_list(a["p_bar"], "abel.p_bar");
      if (cfg.abel.p_bar.empty()) fail("abel.p_bar", a["p_bar"], "must not be empty");
    }
    if (a["samples"]) cfg.abel.samples = as_count(a["samples"], "abel.samples", 2);
  }

  if (const auto inv = root["inverse"]) {
    reject_unknown(inv, "inverse", {"samples"});
    if (inv["samples"]) cfg.inverse_samples = as_count(inv["samples"], "inverse.samples");
  }

  cfg.trajectory_init = {1.0, 0.0, cfg.window.t0};
  cfg.trajectory_t_end = cfg.t_end;
  if (const auto tr = root["trajectory"]) {
    reject_unknown(tr, "trajectory", {"q0", "p0", "t0", "t_end"});
    if (tr["q0"]) cfg.trajectory_init.q = as_double(tr["q0"], "trajectory.q0");
    if (tr["p0"]) cfg.trajectory_init.p = as_double(tr["p0"], "trajectory.p0");
    if (tr["t0"]) cfg.trajectory_init.t = as_double(tr["t0"], "trajectory.t0");
    if (tr["t_end"]) cfg.trajectory_t_end = as_double(tr["t_end"], "trajectory.t_end");
    if (!(cfg.trajectory_t_end > cfg.trajectory_init.t)) {
      fail("trajectory.t_end", tr, "must exceed trajectory.t0");
    }
  }
  if (cfg.reduction_inits.empty()) cfg.reduction_inits.push_back(cfg.trajectory_init);

  if (const auto s = root["seed"]) {
    const double v = as_double(s, "seed");
    if (v < 0 || v != std::floor(v) || v > 9007199254740992.0) {
      fail("seed", s, "must be a non-negative integer");
    }
    cfg.seed = static_cast<std::uint64_t>(v);
  }
  if (const auto t = root["threads"]) cfg.threads = as_count(t, "threads");

  if (const auto o = root["output"]) {
    reject_unknown(o, "output", {"dir"});
    if (o["dir"]) cfg.output_dir = as_string(o["dir"], "output.dir");
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

FamilyInstance build_family(const ScenarioConfig& cfg) {
  auto time_fn = [&](const std::string& key) {
    auto it = cfg.functions.find(key);
    if (it == cfg.functions.end()) return TimeFunction::constant(0.0);
    return TimeFunction::make(it->second.kind, it->second.params);
  };
  auto space_fn = [&](const std::string& key) {
    auto it = cfg.functions.find(key);
    if (it == cfg.functions.end()) return SpaceProfile::constant(0.0);
    return SpaceProfile::make(it->second.kind, it->second.params);
  };

  FamilySetup setup;
  setup.window = cfg.window;
  setup.v0 = time_fn("v0");

  if (cfg.functions.count("rho")) {
    try {
      require_nonzero(time_fn("rho"), cfg.window, "rho", setup.rho_guard);
    } catch (const ConstructionError& e) {
      throw ConfigError("functions.rho", 0, e.what());
    }
  }

  try {
    switch (cfg.family) {
      case FamilyKind::forced_oscillator:
        return forced_oscillator(time_fn("rho"), time_fn("force"), setup);
      case FamilyKind::sarlet:
        return sarlet(time_fn("rho"), time_fn("sigma"), time_fn("gamma"), setup, cfg.form);
      case FamilyKind::quadratic:
        return quadratic(time_fn("rho"), time_fn("sigma"), space_fn("U"), setup);
      case FamilyKind::giacomini:
        return giacomini(space_fn("c2"), space_fn("W"), setup);
      case FamilyKind::abel:
        return abel_family(time_fn("rho"), cfg.k, space_fn("U"), setup);
      case FamilyKind::inverse:
        return autonomous(space_fn("U"), setup);
    }
  } catch (const ConstructionError& e) {
    throw ConfigError(cfg.family == FamilyKind::abel ? "k" : "window", 0, e.what());
  } catch (const ContractError& e) {
    throw ConfigError("family", 0, e.what());
  }
  throw ConfigError("family", 0, "unsupported family");
}

}  // namespace frobenius::cli
