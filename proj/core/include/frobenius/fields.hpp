#pragma once

// Vector fields on extended phase space (q, p, t).
//
//   u = d/dt + p d/dq - V_q d/dp                 dynamical field
//   v = d/dq + C d/dp                            reduced compatible field
//
// [u, v] = alpha u + beta v holds for the reduced field exactly when the
// basic equation u(C) + C^2 + V_qq = 0 is satisfied, with alpha = 0 and
// beta = -C.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frobenius/errors.hpp"
#include "frobenius/jet.hpp"
#include "frobenius/types.hpp"

namespace frobenius {

/// Domain predicate made of named singular sets.
///
/// A margin constraint admits x when |m(x)| >= min_abs (or m(x) >= min_abs for
/// one-sided constraints). A sign change of m between two states means the
/// segment joining them crossed the singular set m = 0, which integrators use
/// to stop even when a step jumps over the excluded band.
class Guard {
 public:
  using Margin = std::function<double(const PhaseState&)>;
  using Predicate = std::function<bool(const PhaseState&)>;

  Guard& exclude_near(std::string name, Margin margin, double min_abs);
  Guard& require_positive(std::string name, Margin margin, double min_value);
  Guard& require(std::string name, Predicate predicate);

  bool admits(const PhaseState& x) const { return !violation(x).has_value(); }
  /// Name of the first violated constraint, if any.
  std::optional<std::string> violation(const PhaseState& x) const;
  /// True if some margin changes sign between a and b.
  bool crossed(const PhaseState& a, const PhaseState& b) const;

  bool empty() const { return margins_.empty() && predicates_.empty(); }

  friend Guard operator&(Guard a, const Guard& b);

 private:
  struct MarginConstraint {
    std::string name;
    Margin margin;
    double bound;
    bool one_sided;
  };
  struct PredicateConstraint {
    std::string name;
    Predicate predicate;
  };
  std::vector<MarginConstraint> margins_;
  std::vector<PredicateConstraint> predicates_;
};

/// V and the derivatives the basic equation and the general bracket need.
struct PotentialJet {
  double value = 0.0;
  double d_q = 0.0;
  double d_t = 0.0;
  double d_qq = 0.0;
  double d_qt = 0.0;
};

/// A time-dependent potential V(q, t) with its guard on (q, t).
class PotentialSpec {
 public:
  using Evaluator = std::function<PotentialJet(double q, double t)>;
  using Slope = std::function<double(double q, double t)>;

  /// `slope` returns V_q alone; it defaults to eval(q, t).d_q.
  PotentialSpec(Evaluator eval, Guard guard, Slope slope = {});

  /// Exact derivatives by nested forward-mode differentiation of f(S q, S t).
  template <class F>
  static PotentialSpec analytic(F f, Guard guard = {}) {
    return PotentialSpec(
        [f](double q, double t) {
          Jet2 Q(Jet1::variable(q, kSlotQ), {});
          Q.d[kSlotQ] = Jet1(1.0);
          Jet2 T(Jet1::variable(t, kSlotT), {});
          T.d[kSlotT] = Jet1(1.0);
          const Jet2 r = f(Q, T);
          return PotentialJet{r.v.v, r.v.d[kSlotQ], r.v.d[kSlotT], r.d[kSlotQ].d[kSlotQ],
                              r.d[kSlotQ].d[kSlotT]};
        },
        std::move(guard),
        [f](double q, double t) {
          return f(Jet1::variable(q, kSlotQ), Jet1(t)).d[kSlotQ];
        });
  }

  /// Central finite differences, step max(1e-6, 1e-6 |x|) per coordinate.
  static PotentialSpec numeric(std::function<double(double q, double t)> f, Guard guard = {});

  PotentialJet jet(double q, double t) const { return eval_(q, t); }
  double value(double q, double t) const { return eval_(q, t).value; }
  double d_q(double q, double t) const { return slope_(q, t); }
  double d_qq(double q, double t) const { return eval_(q, t).d_qq; }
  double d_t(double q, double t) const { return eval_(q, t).d_t; }
  double d_qt(double q, double t) const { return eval_(q, t).d_qt; }

  bool admits(double q, double t) const { return guard_.admits({q, 0.0, t}); }
  const Guard& guard() const { return guard_; }

 private:
  Evaluator eval_;
  Slope slope_;
  Guard guard_;
};

/// Value and first partials of a scalar field at a point.
struct FieldJet {
  double value = 0.0;
  double d_q = 0.0;
  double d_p = 0.0;
  double d_t = 0.0;
};

/// A scalar function of (q, p, t) with first partials, optionally second.
///
/// Houses compatible-field coefficients C, invariants I and J, and
/// characteristic functions f.
class ScalarField {
 public:
  using FirstOrder = std::function<Jet1(const PhaseState&)>;
  using SecondOrder = std::function<Jet2(const PhaseState&)>;

  ScalarField(FirstOrder first, Guard guard, SecondOrder second = {})
      : first_(std::move(first)), second_(std::move(second)), guard_(std::move(guard)) {}

  /// Exact partials of f(S q, S p, S t). With Order == 2 the Hessian is
  /// available too (needed when the field is turned into C = -J_q / J_p).
  template <int Order = 1, class F>
  static ScalarField analytic(F f, Guard guard = {}) {
    FirstOrder first = [f](const PhaseState& x) {
      return f(Jet1::variable(x.q, kSlotQ), Jet1::variable(x.p, kSlotP),
               Jet1::variable(x.t, kSlotT));
    };
    SecondOrder second;
    if constexpr (Order >= 2) {
      second = [f](const PhaseState& x) {
        auto seed = [](double v, std::size_t slot) {
          Jet2 s(Jet1::variable(v, slot), {});
          s.d[slot] = Jet1(1.0);
          return s;
        };
        return f(seed(x.q, kSlotQ), seed(x.p, kSlotP), seed(x.t, kSlotT));
      };
    }
    return ScalarField(std::move(first), std::move(guard), std::move(second));
  }

  /// Central finite differences with step max(1e-6, 1e-6 |x|); accuracy O(h^2).
  static ScalarField numeric(std::function<double(const PhaseState&)> f, Guard guard = {});

  FieldJet jet(const PhaseState& x) const;
  Jet1 jet1(const PhaseState& x) const { return first_(x); }
  double value(const PhaseState& x) const { return first_(x).v; }
  double d_q(const PhaseState& x) const { return first_(x).d[kSlotQ]; }
  double d_p(const PhaseState& x) const { return first_(x).d[kSlotP]; }
  double d_t(const PhaseState& x) const { return first_(x).d[kSlotT]; }

  bool has_second_order() const { return static_cast<bool>(second_); }
  /// Only valid when has_second_order().
  Jet2 jet2(const PhaseState& x) const { return second_(x); }

  bool admits(const PhaseState& x) const { return guard_.admits(x); }
  const Guard& guard() const { return guard_; }

 private:
  FirstOrder first_;
  SecondOrder second_;
  Guard guard_;
};

/// Coefficients of [u, v] = alpha u + beta v.
struct BracketCoeffs {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Components are ordered (d/dt, d/dq, d/dp).
using FieldComponents = std::array<double, 3>;

struct BracketResult {
  BracketCoeffs coeffs;
  FieldComponents bracket{};   ///< [u, v]
  FieldComponents residual{};  ///< [u, v] - alpha u - beta v
};

/// v = A d/dt + B d/dq + C d/dp with B != A p on the guard.
struct GeneralField {
  ScalarField A;
  ScalarField B;
  ScalarField C;
};

inline constexpr double kDefaultMomentumGuard = 1e-3;

/// u(s) = s_t + p s_q - V_q s_p. Throws DomainError outside the guards.
double apply_u(const PotentialSpec& V, const ScalarField& s, const PhaseState& x);

/// v(s) = s_q + C s_p for the reduced field with coefficient C.
double apply_v(const ScalarField& C, const ScalarField& s, const PhaseState& x);

/// u(C) + C^2 + V_qq; zero exactly when v = d/dq + C d/dp is compatible at x.
double basic_equation_residual(const PotentialSpec& V, const ScalarField& C, const PhaseState& x);

/// Lie bracket of u with the reduced field, computed componentwise, together
/// with alpha = 0, beta = -C(x) and the remaining residual. The d/dp slot of
/// the residual equals basic_equation_residual.
BracketResult bracket_coeffs(const PotentialSpec& V, const ScalarField& C, const PhaseState& x);

/// Solves [u, g] = alpha u + beta g for a general field from its d/dt and d/dq
/// slots and reports what is left in the d/dp slot.
BracketResult general_compatibility(const GeneralField& g, const PotentialSpec& V,
                                    const PhaseState& x);

/// (C + A V_q) / (B - A p). Throws SingularReductionError when B = A p.
double reduce_general_field(const GeneralField& g, const PotentialSpec& V, const PhaseState& x);

/// The reduced coefficient as a field with exact first partials.
ScalarField reduced_field(const GeneralField& g, const PotentialSpec& V);

/// C = -J_q / J_p with guard |J_p| >= delta_p intersected with J's guard.
/// Uses J's Hessian when available, finite differences of J's partials otherwise.
ScalarField compatible_from_invariant(const ScalarField& J,
                                      double delta_p = kDefaultMomentumGuard);

}  // namespace frobenius
