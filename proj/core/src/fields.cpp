#include "frobenius/fields.hpp"

#include <algorithm>
#include <cmath>

namespace frobenius {

Guard& Guard::exclude_near(std::string name, Margin margin, double min_abs) {
  margins_.push_back({std::move(name), std::move(margin), min_abs, false});
  return *this;
}

Guard& Guard::require_positive(std::string name, Margin margin, double min_value) {
  margins_.push_back({std::move(name), std::move(margin), min_value, true});
  return *this;
}

Guard& Guard::require(std::string name, Predicate predicate) {
  predicates_.push_back({std::move(name), std::move(predicate)});
  return *this;
}

std::optional<std::string> Guard::violation(const PhaseState& x) const {
  for (const auto& m : margins_) {
    const double value = m.margin(x);
    const bool ok = m.one_sided ? value >= m.bound : std::abs(value) >= m.bound;
    if (!ok || !std::isfinite(value)) return m.name;
  }
  for (const auto& p : predicates_) {
    if (!p.predicate(x)) return p.name;
  }
  return std::nullopt;
}

bool Guard::crossed(const PhaseState& a, const PhaseState& b) const {
  for (const auto& m : margins_) {
    const double ma = m.margin(a);
    const double mb = m.margin(b);
    if (m.one_sided) {
      if (ma >= m.bound && mb < m.bound) return true;
    } else if ((ma > 0.0) != (mb > 0.0)) {
      return true;
    }
  }
  return false;
}

Guard operator&(Guard a, const Guard& b) {
  a.margins_.insert(a.margins_.end(), b.margins_.begin(), b.margins_.end());
  a.predicates_.insert(a.predicates_.end(), b.predicates_.begin(), b.predicates_.end());
  return a;
}

namespace {

double step_for(double x) { return std::max(1e-6, 1e-6 * std::abs(x)); }
double second_step_for(double x) { return std::max(1e-4, 1e-4 * std::abs(x)); }

void require_inside(const PotentialSpec& V, const PhaseState& x) {
  if (auto bad = V.guard().violation({x.q, 0.0, x.t})) {
    throw DomainError("state outside potential guard (" + *bad + ")");
  }
}

void require_inside(const ScalarField& s, const PhaseState& x, const char* what) {
  if (auto bad = s.guard().violation(x)) {
    throw DomainError(std::string("state outside ") + what + " guard (" + *bad + ")");
  }
}

// Component of a vector field together with its gradient in (q, p, t).
struct Component {
  double value;
  std::array<double, 3> grad;
};

Component from_jet(const Jet1& j) { return {j.v, j.d}; }

using Field3 = std::array<Component, 3>;  // (d/dt, d/dq, d/dp)

// u as components: (1, p, -V_q).
Field3 dynamical_components(const PotentialJet& vj, const PhaseState& x) {
  Field3 u;
  u[0] = {1.0, {0.0, 0.0, 0.0}};
  u[1] = {x.p, {0.0, 1.0, 0.0}};
  u[2] = {-vj.d_q, {-vj.d_qq, 0.0, -vj.d_qt}};
  return u;
}

// Directional derivative of a component along a field with values w = (w_t, w_q, w_p).
double along(const Field3& w, const Component& c) {
  return w[0].value * c.grad[kSlotT] + w[1].value * c.grad[kSlotQ] + w[2].value * c.grad[kSlotP];
}

FieldComponents lie_bracket(const Field3& a, const Field3& b) {
  FieldComponents r{};
  for (std::size_t i = 0; i < 3; ++i) r[i] = along(a, b[i]) - along(b, a[i]);
  return r;
}

}  // namespace

PotentialSpec::PotentialSpec(Evaluator eval, Guard guard, Slope slope)
    : eval_(std::move(eval)), slope_(std::move(slope)), guard_(std::move(guard)) {
  if (!slope_) {
    slope_ = [e = eval_](double q, double t) { return e(q, t).d_q; };
  }
}

PotentialSpec PotentialSpec::numeric(std::function<double(double, double)> f, Guard guard) {
  return PotentialSpec(
      [f](double q, double t) {
        const double hq = step_for(q), ht = step_for(t);
        const double Hq = second_step_for(q), Ht = second_step_for(t);
        PotentialJet j;
        j.value = f(q, t);
        j.d_q = (f(q + hq, t) - f(q - hq, t)) / (2.0 * hq);
        j.d_t = (f(q, t + ht) - f(q, t - ht)) / (2.0 * ht);
        // Second differences need a wider step to stay above the rounding floor.
        j.d_qq = (f(q + Hq, t) - 2.0 * j.value + f(q - Hq, t)) / (Hq * Hq);
        j.d_qt = (f(q + Hq, t + Ht) - f(q + Hq, t - Ht) - f(q - Hq, t + Ht) +
                  f(q - Hq, t - Ht)) /
                 (4.0 * Hq * Ht);
        return j;
      },
      std::move(guard),
      [f](double q, double t) {
        const double h = step_for(q);
        return (f(q + h, t) - f(q - h, t)) / (2.0 * h);
      });
}

ScalarField ScalarField::numeric(std::function<double(const PhaseState&)> f, Guard guard) {
  return ScalarField(
      [f = std::move(f)](const PhaseState& x) {
        Jet1 j(f(x), {});
        const double hq = step_for(x.q), hp = step_for(x.p), ht = step_for(x.t);
        j.d[kSlotQ] = (f({x.q + hq, x.p, x.t}) - f({x.q - hq, x.p, x.t})) / (2.0 * hq);
        j.d[kSlotP] = (f({x.q, x.p + hp, x.t}) - f({x.q, x.p - hp, x.t})) / (2.0 * hp);
        j.d[kSlotT] = (f({x.q, x.p, x.t + ht}) - f({x.q, x.p, x.t - ht})) / (2.0 * ht);
        return j;
      },
      std::move(guard));
}

FieldJet ScalarField::jet(const PhaseState& x) const {
  const Jet1 j = first_(x);
  return {j.v, j.d[kSlotQ], j.d[kSlotP], j.d[kSlotT]};
}

double apply_u(const PotentialSpec& V, const ScalarField& s, const PhaseState& x) {
  require_inside(V, x);
  require_inside(s, x, "field");
  const FieldJet sj = s.jet(x);
  return sj.d_t + x.p * sj.d_q - V.d_q(x.q, x.t) * sj.d_p;
}

double apply_v(const ScalarField& C, const ScalarField& s, const PhaseState& x) {
  require_inside(C, x, "compatible field");
  require_inside(s, x, "field");
  const FieldJet sj = s.jet(x);
  return sj.d_q + C.value(x) * sj.d_p;
}

double basic_equation_residual(const PotentialSpec& V, const ScalarField& C, const PhaseState& x) {
  require_inside(V, x);
  require_inside(C, x, "compatible field");
  const PotentialJet vj = V.jet(x.q, x.t);
  const FieldJet cj = C.jet(x);
  const double uC = cj.d_t + x.p * cj.d_q - vj.d_q * cj.d_p;
  return uC + cj.value * cj.value + vj.d_qq;
}

BracketResult bracket_coeffs(const PotentialSpec& V, const ScalarField& C, const PhaseState& x) {
  require_inside(V, x);
  require_inside(C, x, "compatible field");
  const PotentialJet vj = V.jet(x.q, x.t);
  const Field3 u = dynamical_components(vj, x);
  const Component c = from_jet(C.jet1(x));
  const Field3 v{Component{0.0, {0.0, 0.0, 0.0}}, Component{1.0, {0.0, 0.0, 0.0}}, c};

  BracketResult r;
  r.bracket = lie_bracket(u, v);
  r.coeffs = {0.0, -c.value};
  for (std::size_t i = 0; i < 3; ++i) {
    r.residual[i] = r.bracket[i] - r.coeffs.alpha * u[i].value - r.coeffs.beta * v[i].value;
  }
  return r;
}

namespace {

double reduction_denominator(double A, double B, double p) { return B - A * p; }

bool singular(double A, double B, double p) {
  const double den = reduction_denominator(A, B, p);
  const double scale = std::max({1.0, std::abs(B), std::abs(A * p)});
  return std::abs(den) <= 1e-12 * scale;
}

}  // namespace

BracketResult general_compatibility(const GeneralField& g, const PotentialSpec& V,
                                    const PhaseState& x) {
  require_inside(V, x);
  require_inside(g.A, x, "A");
  require_inside(g.B, x, "B");
  require_inside(g.C, x, "C");
  const PotentialJet vj = V.jet(x.q, x.t);
  const Field3 u = dynamical_components(vj, x);
  const Field3 w{from_jet(g.A.jet1(x)), from_jet(g.B.jet1(x)), from_jet(g.C.jet1(x))};
  if (singular(w[0].value, w[1].value, x.p)) {
    throw SingularReductionError("general field has B = A p at the requested state");
  }

  BracketResult r;
  r.bracket = lie_bracket(u, w);
  // d/dt slot: br_t = alpha + beta A;  d/dq slot: br_q = alpha p + beta B.
  const double beta = (r.bracket[1] - x.p * r.bracket[0]) /
                      reduction_denominator(w[0].value, w[1].value, x.p);
  const double alpha = r.bracket[0] - beta * w[0].value;
  r.coeffs = {alpha, beta};
  for (std::size_t i = 0; i < 3; ++i) {
    r.residual[i] = r.bracket[i] - alpha * u[i].value - beta * w[i].value;
  }
  return r;
}

double reduce_general_field(const GeneralField& g, const PotentialSpec& V, const PhaseState& x) {
  require_inside(V, x);
  const double A = g.A.value(x), B = g.B.value(x), C = g.C.value(x);
  if (singular(A, B, x.p)) {
    throw SingularReductionError("cannot reduce: B = A p at the requested state");
  }
  return (C + A * V.d_q(x.q, x.t)) / reduction_denominator(A, B, x.p);
}

ScalarField reduced_field(const GeneralField& g, const PotentialSpec& V) {
  Guard guard = g.A.guard() & g.B.guard() & g.C.guard() & V.guard();
  guard.exclude_near(
      "B - A p",
      [A = g.A, B = g.B](const PhaseState& x) {
        return reduction_denominator(A.value(x), B.value(x), x.p);
      },
      1e-12);
  return ScalarField(
      [g, V](const PhaseState& x) {
        const PotentialJet vj = V.jet(x.q, x.t);
        const Jet1 A = g.A.jet1(x), B = g.B.jet1(x), C = g.C.jet1(x);
        Jet1 Vq(vj.d_q, {});
        Vq.d[kSlotQ] = vj.d_qq;
        Vq.d[kSlotT] = vj.d_qt;
        const Jet1 p = Jet1::variable(x.p, kSlotP);
        return (C + A * Vq) / (B - A * p);
      },
      std::move(guard));
}

ScalarField compatible_from_invariant(const ScalarField& J, double delta_p) {
  Guard guard = J.guard();
  guard.exclude_near("J_p", [J](const PhaseState& x) { return J.d_p(x); }, delta_p);

  if (J.has_second_order()) {
    return ScalarField(
        [J](const PhaseState& x) {
          const Jet2 j = J.jet2(x);
          return -j.d[kSlotQ] / j.d[kSlotP];
        },
        std::move(guard));
  }

  auto quotient = [J](const PhaseState& x) {
    const FieldJet j = J.jet(x);
    return -j.d_q / j.d_p;
  };
  return ScalarField(
      [quotient](const PhaseState& x) {
        Jet1 c(quotient(x), {});
        const double hq = step_for(x.q), hp = step_for(x.p), ht = step_for(x.t);
        c.d[kSlotQ] = (quotient({x.q + hq, x.p, x.t}) - quotient({x.q - hq, x.p, x.t})) / (2 * hq);
        c.d[kSlotP] = (quotient({x.q, x.p + hp, x.t}) - quotient({x.q, x.p - hp, x.t})) / (2 * hp);
        c.d[kSlotT] = (quotient({x.q, x.p, x.t + ht}) - quotient({x.q, x.p, x.t - ht})) / (2 * ht);
        return c;
      },
      std::move(guard));
}

}  // namespace frobenius
