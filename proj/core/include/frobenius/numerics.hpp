#pragma once

// Numeric substrate: an embedded Dormand-Prince 5(4) integrator with a
// fourth-order continuous extension, adaptive Gauss-Kronrod quadrature and
// safeguarded bracketed root finding.

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frobenius/errors.hpp"
#include "frobenius/fields.hpp"
#include "frobenius/types.hpp"

namespace frobenius {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1'000'000;
  bool dense_output = false;

  /// Throws ContractError unless tolerances and limits are positive.
  void validate() const;
};

/// Auxiliary quantity co-integrated with the canonical equations, e.g. T' = 1/rho^2.
struct AuxOde {
  std::string name;
  double initial = 0.0;
  /// Rate of this quantity given the phase state and all auxiliary values.
  std::function<double(const PhaseState& x, std::span<const double> aux)> rhs;
};

/// Continuous extension of one accepted step on [x0, x0 + h].
struct DenseSegment {
  double x0 = 0.0;
  double h = 0.0;
  std::array<std::vector<double>, 5> coeff;

  double x1() const { return x0 + h; }
  bool covers(double x) const;
  std::vector<double> state(double x) const;
  /// d/dx of the interpolating polynomial.
  std::vector<double> derivative(double x) const;
};

using OdeRhs = std::function<void(double x, std::span<const double> y, std::span<double> dydx)>;

/// Called after each accepted step with the old and new points; a returned
/// reason stops the integration before the new point is recorded.
using OdeStop = std::function<std::optional<std::string>(
    double x0, std::span<const double> y0, double x1, std::span<const double> y1)>;

struct OdeSolution {
  std::vector<double> x;
  std::vector<std::vector<double>> y;
  std::vector<DenseSegment> segments;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  bool stopped = false;
  std::string stop_reason;
};

/// Integrates y' = rhs(x, y) from x0 to x1 (either direction). Right-hand
/// sides that throw DomainError or return non-finite values are treated as
/// leaving the domain: the step is retried smaller and, if that collapses,
/// the solution stops cleanly with stop_reason set.
OdeSolution solve_ode(const OdeRhs& rhs, double x0, std::vector<double> y0, double x1,
                      const IntegratorConfig& cfg, const OdeStop& stop = {});

struct Trajectory {
  std::vector<PhaseState> samples;
  std::vector<std::string> aux_names;
  std::vector<std::vector<double>> aux;  ///< aux[i] holds the auxiliaries at samples[i]
  std::vector<DenseSegment> segments;    ///< filled when dense_output is requested
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  bool guard_exit = false;
  std::string exit_reason;

  const PhaseState& back() const { return samples.back(); }
  /// Index of the segment covering t, or nullopt.
  std::optional<std::size_t> segment_at(double t) const;
  /// Interpolated state; requires dense output.
  PhaseState state_at(double t) const;
  /// Interpolated (dq/dt, dp/dt) from differentiating the dense output.
  std::array<double, 2> rate_at(double t) const;
};

/// q' = p, p' = -V_q(q, t) plus auxiliaries, from init.t to t_end > init.t.
/// Leaving V's guard (or `stop_guard`) ends the trajectory with guard_exit set;
/// the last recorded sample is the last admitted state.
Trajectory integrate(const PotentialSpec& V, const PhaseState& init, double t_end,
                     const IntegratorConfig& cfg, std::span<const AuxOde> aux = {},
                     const Guard* stop_guard = nullptr);

/// Adaptive Gauss-Kronrod (7/15) estimate of the integral of fn over [a, b].
/// Throws ConvergenceError when the error estimate exceeds tol * max(1, L1 norm).
double quad(const std::function<double(double)>& fn, double a, double b, double tol = 1e-12);

/// Root inside [lo, hi] with final bracket width <= tol (TOMS 748, which falls
/// back to bisection). Throws BracketError without a sign change and
/// ConvergenceError when max_iter is exhausted.
double find_root(const std::function<double(double)>& fn, double lo, double hi, double tol,
                 std::size_t max_iter = 200);

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  /// Both ends differ in sign from the centre: at least two roots straddle it.
  bool ambiguous = false;
};

/// Widens [center - w, center + w] geometrically (w doubling, at most
/// max_doublings times) until fn changes sign against fn(center).
/// Throws BracketError if no sign change is found.
Bracket expand_bracket(const std::function<double(double)>& fn, double center, double width,
                       int max_doublings = 20);

/// Running integral F(t) = int_origin^t f, with nodes precomputed on a span so
/// each evaluation only integrates over one short panel.
class CumulativeQuadrature {
 public:
  CumulativeQuadrature(std::function<double(double)> integrand, double origin, TimeWindow span,
                       std::size_t panels = 64, double tol = 1e-13);

  double operator()(double t) const;
  double integrand(double t) const { return f_(t); }
  double origin() const { return origin_; }

 private:
  std::function<double(double)> f_;
  double origin_;
  double tol_;
  std::vector<double> nodes_;
  std::vector<double> values_;
};

}  // namespace frobenius
