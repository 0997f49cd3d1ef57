#pragma once

// Pass/fail evidence for family instances: basic-equation residual scans,
// invariant drift along trajectories, reduction and Abel-slope consistency,
// and inverse-construction round trips.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frobenius/families.hpp"
#include "frobenius/fields.hpp"
#include "frobenius/numerics.hpp"

namespace frobenius {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr std::size_t kMaxSampleRetries = 100'000;

/// count uniformly spaced values on [lo, hi]; a single value sits at lo.
struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  double at(std::size_t i) const;
};

/// Tensor grid ordered with t fastest, then p, then q.
struct GridSpec {
  Axis q{-2.0, 2.0, 10};
  Axis p{-2.0, 2.0, 10};
  Axis t{0.0, 1.0, 10};

  std::size_t size() const { return q.count * p.count * t.count; }
  PhaseState state(std::size_t index) const;
  /// Throws ContractError for empty or non-finite axes.
  void validate() const;
};

struct ResidualPoint {
  PhaseState x;
  double residual = 0.0;  ///< 0 for excluded points
  bool included = false;
};

/// Central differences of V and C (step h on each coordinate) against the analytic residual.
struct FdCrossCheck {
  std::size_t points = 0;
  double step = 1e-5;
  double max_abs_diff = 0.0;
  double threshold = 1e-4;
  bool pass = false;
};

struct ResidualReport {
  GridSpec grid;
  std::vector<ResidualPoint> points;  ///< grid order
  std::size_t included = 0;
  std::size_t excluded = 0;
  double max_abs = 0.0;
  double mean_abs = 0.0;
  /// |residual| quantiles at 0, 0.25, 0.5, 0.75, 0.95 and 1 over included points.
  std::array<double, 6> quantiles{};
  double threshold = 0.0;
  bool pass = false;
  std::optional<FdCrossCheck> cross_check;
};

inline constexpr std::array<double, 6> kQuantileLevels{0.0, 0.25, 0.5, 0.75, 0.95, 1.0};

struct ScanOptions {
  std::size_t threads = 1;
  bool cross_check = false;
  std::size_t cross_check_points = 10;
  double cross_check_step = 1e-5;
  double cross_check_threshold = 1e-4;
  std::uint64_t seed = kDefaultSeed;
};

/// basic_equation_residual at every grid point inside the family's guard.
/// Throws DegenerateScanError when every point is excluded.
ResidualReport residual_scan(const FamilyInstance& fam, const GridSpec& grid, double threshold,
                             const ScanOptions& options = {});

struct DriftSeries {
  PhaseState init;
  std::vector<double> t;
  std::vector<double> invariant;
  std::vector<double> drift;  ///< |I - I0| / max(1, |I0|)
  double max_drift = 0.0;
  bool guard_exit = false;
  std::string exit_reason;
};

struct DriftReport {
  std::vector<DriftSeries> series;
  double max_drift = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Integrates each initial state to t_end and tracks the family invariant at
/// accepted steps. Throws UnsupportedCheckError without an invariant and
/// DomainError for an initial state outside the invariant's guard.
DriftReport drift_check(const FamilyInstance& fam, std::span<const PhaseState> inits, double t_end,
                        const IntegratorConfig& cfg, double threshold, std::size_t threads = 1);

struct ReductionPoint {
  double t = 0.0;
  double f = 0.0;
  double dfdt = 0.0;  ///< from the differentiated dense output
  double rate = 0.0;  ///< closed-form right-hand side
  double residual = 0.0;
};

struct ReductionReport {
  std::string name;
  std::vector<ReductionPoint> points;
  double max_residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
  bool truncated = false;  ///< trajectory left the guard before its end time
};

/// Checks df/dt = rate(f, t) at the midpoint of every dense-output segment.
/// Requires a family reduction and a trajectory integrated with dense output.
ReductionReport riccati_consistency(const FamilyInstance& fam, const Trajectory& traj,
                                    double threshold);

struct AbelPoint {
  double q_bar = 0.0;
  double p_bar = 0.0;
  double traced = 0.0;     ///< v(p_bar) / v(q_bar) along the traced characteristic
  double predicted = 0.0;  ///< closed-form slope
  double error = 0.0;      ///< |traced - predicted| / max(1, |predicted|)
};

struct AbelReport {
  double t_fixed = 0.0;
  std::vector<AbelPoint> points;
  std::size_t excluded = 0;
  double max_error = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Traces dp/dq = C(q, p, t_fixed) from each starting p_bar at q_bar_lo toward
/// q_bar_hi and compares the transformed slope with the closed form at
/// `samples` points per curve. Curves stop where |p_bar| reaches the guard.
AbelReport abel_characteristic_check(const FamilyInstance& fam, double t_fixed, double q_bar_lo,
                                     double q_bar_hi, double threshold,
                                     std::span<const double> p_bar_starts,
                                     std::size_t samples = 50);

struct InverseReport {
  std::size_t samples = 0;
  std::size_t included = 0;
  std::size_t excluded = 0;
  double max_residual = 0.0;
  double max_tangency = 0.0;  ///< max |v(J)|
  double threshold = 0.0;
  bool pass = false;
};

/// Builds C = -J_q / J_p and reports the basic-equation residual and v(J) at
/// the samples. Throws DegenerateScanError if every sample is guarded out.
InverseReport inverse_roundtrip(const PotentialSpec& V, const ScalarField& J,
                                std::span<const PhaseState> samples, double threshold,
                                double delta_p = kDefaultMomentumGuard);

struct SampleBox {
  Axis q{-2.0, 2.0, 1};
  Axis p{-2.0, 2.0, 1};
  Axis t{0.0, 1.0, 1};
};

/// n uniform draws from the box admitted by the guard, reproducible for a
/// given seed. Throws DegenerateScanError after kMaxSampleRetries rejections in a row.
std::vector<PhaseState> sample_states(const Guard& guard, const SampleBox& box, std::size_t n,
                                      std::uint64_t seed = kDefaultSeed);

struct AuxAgreementReport {
  std::vector<std::string> names;
  std::vector<double> max_abs_diff;  ///< per quadrature
  double max_abs = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Compares co-integrated auxiliaries of a trajectory with their pointwise
/// quadratures at every sample. The trajectory must have been integrated
/// with fam.aux_odes(init.t).
AuxAgreementReport aux_agreement(const FamilyInstance& fam, const Trajectory& traj,
                                 double threshold);

}  // namespace frobenius
