#pragma once

// Potential families that admit a compatible field, each packaged with its
// coefficient C, an invariant where one is known in closed form, and the
// auxiliary quantities the verification checks need.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frobenius/fields.hpp"
#include "frobenius/funcat.hpp"
#include "frobenius/numerics.hpp"
#include "frobenius/types.hpp"

namespace frobenius {

enum class FamilyKind { forced_oscillator, sarlet, quadratic, giacomini, abel, inverse };

std::string_view to_string(FamilyKind kind);
/// Throws ContractError for an unknown tag.
FamilyKind parse_family_kind(std::string_view name);

/// Common construction parameters.
struct FamilySetup {
  TimeWindow window{0.0, 5.0};
  /// Lower bound on |rho| enforced on the window at construction and pointwise by the guards.
  double rho_guard = kDefaultRhoGuard;
  /// Half-width of the excluded bands around the singular sets of C and I.
  double singular_guard = 1e-3;
  /// Accepted for completeness. A pure function of time does not enter the
  /// equations of motion, so it is never added to V.
  TimeFunction v0 = TimeFunction::constant(0.0);
};

/// A function f constant on the leaves of the compatible field together with
/// the closed-form rate df/dt = rate(f, t) it obeys along trajectories.
struct Reduction {
  std::string name;
  ScalarField f;
  std::function<double(double f, double t)> rate;
};

/// Transformed coordinates of the Abel family and the slope dp_bar/dq_bar
/// their characteristic obeys at frozen t.
struct AbelCharacteristic {
  ScalarField q_bar;
  ScalarField p_bar;
  std::function<double(double q_bar, double p_bar, double t)> slope;
  std::function<PhaseState(double q_bar, double p_bar, double t)> to_state;
};

/// A time integral available both pointwise (quadrature) and as an ODE that
/// can be co-integrated with a trajectory. ODEs may read earlier entries.
struct TimeQuadrature {
  std::string name;
  std::function<double(double t)> pointwise;
  AuxOde ode;
};

struct FamilyInstance {
  std::string label;
  FamilyKind kind;
  TimeWindow window;
  PotentialSpec potential;
  ScalarField compat;
  std::optional<ScalarField> invariant;
  std::map<std::string, std::function<double(const PhaseState&)>> aux;
  std::optional<Reduction> reduction;
  std::optional<AbelCharacteristic> abel;
  std::vector<TimeQuadrature> time_quadratures;

  /// Where V and C are both defined.
  Guard guard() const { return potential.guard() & compat.guard(); }
  /// Where V and I are both defined (V's guard alone without an invariant).
  Guard invariant_guard() const {
    return invariant ? potential.guard() & invariant->guard() : potential.guard();
  }
  /// Co-integrable forms of time_quadratures, started from their values at t0.
  std::vector<AuxOde> aux_odes(double t0 = 0.0) const;
};

/// V = -F' q / rho - rho'' q^2 / (2 rho),  C = rho' / rho,  I = rho p - rho' q - F.
FamilyInstance forced_oscillator(const TimeFunction& rho, const TimeFunction& force,
                                 const FamilySetup& setup = {});

/// Which quadratic term the Sarlet potential carries.
enum class SarletForm {
  /// -rho'' (q - sigma)^2 / (2 rho): the form for which the Riccati reduction holds.
  corrected,
  /// -rho'' q^2 / (2 rho): agrees with the corrected form only when sigma = 0.
  printed,
};

/// With x = q - sigma:
///   V = -sigma'' x - rho'' x^2 / (2 rho) - gamma^2 / (2 x^2) - gamma' log x
///   C = -(sigma' x + 2 gamma) / x^2 + p / x
///   I = T - (x / rho) / (rho (p - sigma') - rho' x - gamma rho / x),  T = int_0^t 1/rho^2
/// The guard is |x| >= singular_guard, or x >= singular_guard when gamma is
/// not constant (the logarithm needs x > 0).
FamilyInstance sarlet(const TimeFunction& rho, const TimeFunction& sigma,
                      const TimeFunction& gamma, const FamilySetup& setup = {},
                      SarletForm form = SarletForm::corrected);

/// q_bar = (q - sigma) / rho and p_bar = rho (p - sigma') - rho' (q - sigma).
struct TransformedState {
  double q_bar = 0.0;
  double p_bar = 0.0;
};
TransformedState to_transformed(const TimeFunction& rho, const TimeFunction& sigma,
                                const PhaseState& x);
PhaseState from_transformed(const TimeFunction& rho, const TimeFunction& sigma,
                            const TransformedState& y, double t);

/// V = (sigma rho'' - rho sigma'') q / rho - rho'' q^2 / (2 rho) + U(q_bar) / rho^2,
/// I = p_bar^2 / 2 + U(q_bar),  C = rho' / rho - U'(q_bar) / (rho^2 p_bar).
FamilyInstance quadratic(const TimeFunction& rho, const TimeFunction& sigma,
                         const SpaceProfile& U, const FamilySetup& setup = {});

/// V(q, t) = W(q - c(V) t) solved along characteristics, C = -V_q / (p - c(V)).
/// For constant c the potential is explicit and I = (p - c)^2 / 2 + V.
/// Throws DomainError where the implicit relation cannot be solved and
/// ShockError where characteristics have crossed.
FamilyInstance giacomini(const SpaceProfile& c2, const SpaceProfile& W,
                         const FamilySetup& setup = {});

/// The implicit Giacomini potential at one point.
double giacomini_potential(const SpaceProfile& c2, const SpaceProfile& W, double q, double t);

/// With T = int_0^t 1/rho^2, E = (T + k) / k, q_bar = q / (rho E) and
/// Gamma = -G / (2 rho^2), G = int_0^t rho^4 E^2 K,
/// K = rho''' / rho + 3 rho' rho'' / rho^2 + 2 rho'' / (rho^3 (T + k)):
///   V = Gamma q_bar^2 + U(q_bar) / rho^2
///   C = rho' / rho - (rho V_q + rho'' q) / p_bar,  p_bar = rho p - rho' q - q / (rho (T + k))
/// No invariant is known in general. Throws ContractError for k = 0 and
/// ConstructionError when |T + k| drops below singular_guard on the window.
FamilyInstance abel_family(const TimeFunction& rho, double k, const SpaceProfile& U,
                           const FamilySetup& setup = {});

/// V = U(q) with J = p^2 / 2 + U and C = -J_q / J_p.
FamilyInstance autonomous(const SpaceProfile& U, const FamilySetup& setup = {});

/// Root Q of Q = F((q - sigma) / rho - Q T(t)), T = int_0^t 1/rho^2, to
/// relative tolerance 1e-12. Throws BracketError or ConvergenceError.
double solve_Q(const SpaceProfile& F, const TimeFunction& rho, const TimeFunction& sigma,
               double q, double t);

}  // namespace frobenius
