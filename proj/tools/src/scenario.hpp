#pragma once

// Scenario files: a YAML document naming a family, its parameter functions,
// the residual grid, sampling boxes, integrator settings and thresholds.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frobenius/families.hpp"
#include "frobenius/funcat.hpp"
#include "frobenius/numerics.hpp"
#include "frobenius/verify.hpp"

namespace frobenius::cli {

/// Malformed or inconsistent scenario. `field` is a dotted path such as
/// "functions.rho.params"; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct FunctionSpec {
  FunctionKind kind = FunctionKind::constant;
  std::vector<double> params{0.0};
};

struct Thresholds {
  double residual = 1e-6;
  double drift = 1e-6;
  double reduction = 1e-5;
  double abel = 1e-6;
  double inverse = 1e-8;
  double aux = 1e-8;
};

/// Checks default to "when applicable"; inverse is opt-in.
struct Checks {
  std::optional<bool> drift;
  std::optional<bool> reduction;
  std::optional<bool> abel;
  std::optional<bool> aux;
  bool inverse = false;
  bool cross_check = true;
};

struct AbelSpec {
  double t = 0.5;
  double q_bar_lo = -1.0;
  double q_bar_hi = 1.0;
  std::vector<double> p_bar{-2.0, -1.0, 1.0, 2.0};
  std::size_t samples = 50;
};

struct ScenarioConfig {
  std::string name;
  FamilyKind family = FamilyKind::forced_oscillator;
  TimeWindow window{0.0, 1.0};
  std::map<std::string, FunctionSpec> functions;
  double k = 1.0;
  SarletForm form = SarletForm::corrected;
  GridSpec grid;
  SampleBox sampling;
  std::size_t drift_samples = 20;
  double t_end = 1.0;
  IntegratorConfig integrator;
  Thresholds thresholds;
  Checks checks;
  std::vector<PhaseState> reduction_inits;
  AbelSpec abel;
  std::size_t inverse_samples = 1000;
  PhaseState trajectory_init{1.0, 0.0, 0.0};
  double trajectory_t_end = 1.0;
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
  std::optional<std::filesystem::path> output_dir;
};

/// Parses and validates a scenario. Throws ConfigError.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& text);

/// Builds the family the scenario describes. Throws ConfigError for
/// construction failures attributable to the configuration.
FamilyInstance build_family(const ScenarioConfig& cfg);

}  // namespace frobenius::cli
