#include "frobenius/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <type_traits>

namespace frobenius {

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::forced_oscillator: return "forced_oscillator";
    case FamilyKind::sarlet: return "sarlet";
    case FamilyKind::quadratic: return "quadratic";
    case FamilyKind::giacomini: return "giacomini";
    case FamilyKind::abel: return "abel";
    case FamilyKind::inverse: return "inverse";
  }
  return "unknown";
}

FamilyKind parse_family_kind(std::string_view name) {
  for (auto k : {FamilyKind::forced_oscillator, FamilyKind::sarlet, FamilyKind::quadratic,
                 FamilyKind::giacomini, FamilyKind::abel, FamilyKind::inverse}) {
    if (to_string(k) == name) return k;
  }
  throw ContractError("unknown family '" + std::string(name) + "'");
}

std::vector<AuxOde> FamilyInstance::aux_odes(double t0) const {
  std::vector<AuxOde> out;
  out.reserve(time_quadratures.size());
  for (const auto& tq : time_quadratures) {
    AuxOde ode = tq.ode;
    ode.initial = tq.pointwise(t0);
    out.push_back(std::move(ode));
  }
  return out;
}

namespace {

// Evaluates a function known as a double (typically by quadrature) at a jet
// argument, given its derivative in a form that accepts jets one level down.
template <class S, class Value, class Slope>
S lift(const S& t, const Value& value, const Slope& slope) {
  if constexpr (std::is_same_v<S, double>) {
    return value(t);
  } else {
    using T = typename S::value_type;
    return chain(t, lift(t.v, value, slope), T(slope(t.v)));
  }
}

// V_q(q, t) at any scalar type, by one more level of forward differentiation.
template <class F, class S>
S d_dq(const F& V, const S& q, const S& t) {
  return V(Jet<S>::variable(q, kSlotQ), Jet<S>(t)).d[kSlotQ];
}

Guard rho_guard(const TimeFunction& rho, double delta) {
  Guard g;
  g.exclude_near("rho", [rho](const PhaseState& x) { return rho(x.t); }, delta);
  return g;
}

std::shared_ptr<const CumulativeQuadrature> inverse_square_integral(const TimeFunction& rho,
                                                                   TimeWindow window) {
  return std::make_shared<const CumulativeQuadrature>(
      [rho](double s) {
        const double r = rho(s);
        return 1.0 / (r * r);
      },
      0.0, window);
}

// T(t) = int_0^t 1/rho^2.
struct InverseSquareIntegral {
  TimeFunction rho;
  std::shared_ptr<const CumulativeQuadrature> quad;

  template <class S>
  S operator()(const S& t) const {
    return lift(
        t, [this](double s) { return (*quad)(s); },
        [this](const auto& s) {
          const auto r = rho.eval(s);
          return 1.0 / (r * r);
        });
  }
};

TimeQuadrature inverse_square_quadrature(const InverseSquareIntegral& T) {
  return {"T",
          [T](double t) { return T(t); },
          {"T", 0.0, [rho = T.rho](const PhaseState& x, std::span<const double>) {
             const double r = rho(x.t);
             return 1.0 / (r * r);
           }}};
}

}  // namespace

FamilyInstance forced_oscillator(const TimeFunction& rho, const TimeFunction& force,
                                 const FamilySetup& setup) {
  require_nonzero(rho, setup.window, "rho", setup.rho_guard);
  const Guard g = rho_guard(rho, setup.rho_guard);

  auto V = [rho, force](const auto& q, const auto& t) {
    const auto r = rho.eval(t);
    return -force.eval(t, 1) * q / r - rho.eval(t, 2) * q * q / (2.0 * r);
  };
  auto C = [rho](const auto&, const auto&, const auto& t) { return rho.eval(t, 1) / rho.eval(t); };
  auto I = [rho, force](const auto& q, const auto& p, const auto& t) {
    return rho.eval(t) * p - rho.eval(t, 1) * q - force.eval(t);
  };
  auto f = [rho](const auto& q, const auto& p, const auto& t) {
    return p - rho.eval(t, 1) * q / rho.eval(t);
  };

  FamilyInstance fam{
      .label = "forced_oscillator",
      .kind = FamilyKind::forced_oscillator,
      .window = setup.window,
      .potential = PotentialSpec::analytic(V, g),
      .compat = ScalarField::analytic(C, g),
      .invariant = ScalarField::analytic<2>(I, g),
      .aux = {},
      .reduction = Reduction{"f", ScalarField::analytic(f, g),
                             [rho, force](double fv, double t) {
                               const double r = rho(t);
                               return -rho.eval(t, 1) * fv / r + force.eval(t, 1) / r;
                             }},
      .abel = std::nullopt,
      .time_quadratures = {},
  };
  fam.aux["f"] = [f](const PhaseState& x) { return f(x.q, x.p, x.t); };
  return fam;
}

FamilyInstance sarlet(const TimeFunction& rho, const TimeFunction& sigma,
                      const TimeFunction& gamma, const FamilySetup& setup, SarletForm form) {
  require_nonzero(rho, setup.window, "rho", setup.rho_guard);
  const bool log_term = !gamma.is_constant();
  const bool corrected = form == SarletForm::corrected;

  Guard g = rho_guard(rho, setup.rho_guard);
  auto x_margin = [sigma](const PhaseState& s) { return s.q - sigma(s.t); };
  if (log_term) {
    g.require_positive("q - sigma", x_margin, setup.singular_guard);
  } else {
    g.exclude_near("q - sigma", x_margin, setup.singular_guard);
  }

  const InverseSquareIntegral T{rho, inverse_square_integral(rho, setup.window)};

  auto V = [rho, sigma, gamma, log_term, corrected](const auto& q, const auto& t) {
    using std::log;
    const auto x = q - sigma.eval(t);
    const auto r = rho.eval(t);
    const auto gm = gamma.eval(t);
    const auto square = corrected ? x * x : q * q;
    auto v = -sigma.eval(t, 2) * x - rho.eval(t, 2) * square / (2.0 * r) - gm * gm / (2.0 * x * x);
    if (log_term) v = v - gamma.eval(t, 1) * log(x);
    return v;
  };
  auto C = [sigma, gamma](const auto& q, const auto& p, const auto& t) {
    const auto x = q - sigma.eval(t);
    return -(sigma.eval(t, 1) * x + 2.0 * gamma.eval(t)) / (x * x) + p / x;
  };
  auto D = [rho, sigma, gamma](const auto& q, const auto& p, const auto& t) {
    const auto x = q - sigma.eval(t);
    const auto r = rho.eval(t);
    return r * (p - sigma.eval(t, 1)) - rho.eval(t, 1) * x - gamma.eval(t) * r / x;
  };
  auto I = [rho, sigma, T, D](const auto& q, const auto& p, const auto& t) {
    const auto x = q - sigma.eval(t);
    return T(t) - (x / rho.eval(t)) / D(q, p, t);
  };
  auto f = [sigma, gamma](const auto& q, const auto& p, const auto& t) {
    const auto x = q - sigma.eval(t);
    return (p - sigma.eval(t, 1)) / x - gamma.eval(t) / (x * x);
  };

  Guard ig = g;
  ig.exclude_near("D", [D](const PhaseState& s) { return D(s.q, s.p, s.t); },
                  setup.singular_guard);

  FamilyInstance fam{
      .label = corrected ? "sarlet" : "sarlet_printed",
      .kind = FamilyKind::sarlet,
      .window = setup.window,
      .potential = PotentialSpec::analytic(V, g),
      .compat = ScalarField::analytic(C, g),
      .invariant = ScalarField::analytic<2>(I, ig),
      .aux = {},
      .reduction = Reduction{"f", ScalarField::analytic(f, g),
                             [rho](double fv, double t) {
                               return -fv * fv + rho.eval(t, 2) / rho(t);
                             }},
      .abel = std::nullopt,
      .time_quadratures = {inverse_square_quadrature(T)},
  };
  fam.aux["T"] = [T](const PhaseState& x) { return T(x.t); };
  fam.aux["f"] = [f](const PhaseState& x) { return f(x.q, x.p, x.t); };
  return fam;
}

TransformedState to_transformed(const TimeFunction& rho, const TimeFunction& sigma,
                                const PhaseState& x) {
  const double r = rho(x.t);
  const double y = x.q - sigma(x.t);
  return {y / r, r * (x.p - sigma.eval(x.t, 1)) - rho.eval(x.t, 1) * y};
}

PhaseState from_transformed(const TimeFunction& rho, const TimeFunction& sigma,
                            const TransformedState& y, double t) {
  const double r = rho(t);
  const double x = r * y.q_bar;
  return {x + sigma(t), (y.p_bar + rho.eval(t, 1) * x) / r + sigma.eval(t, 1), t};
}

FamilyInstance quadratic(const TimeFunction& rho, const TimeFunction& sigma,
                         const SpaceProfile& U, const FamilySetup& setup) {
  require_nonzero(rho, setup.window, "rho", setup.rho_guard);
  const Guard g = rho_guard(rho, setup.rho_guard);

  auto q_bar = [rho, sigma](const auto& q, const auto& t) {
    return (q - sigma.eval(t)) / rho.eval(t);
  };
  auto p_bar = [rho, sigma](const auto& q, const auto& p, const auto& t) {
    return rho.eval(t) * (p - sigma.eval(t, 1)) - rho.eval(t, 1) * (q - sigma.eval(t));
  };
  auto V = [rho, sigma, U, q_bar](const auto& q, const auto& t) {
    const auto r = rho.eval(t);
    const auto r2 = rho.eval(t, 2);
    return (sigma.eval(t) * r2 - r * sigma.eval(t, 2)) * q / r - r2 * q * q / (2.0 * r) +
           U(q_bar(q, t)) / (r * r);
  };
  auto C = [rho, U, q_bar, p_bar](const auto& q, const auto& p, const auto& t) {
    const auto r = rho.eval(t);
    return rho.eval(t, 1) / r - U.eval(q_bar(q, t), 1) / (r * r * p_bar(q, p, t));
  };
  auto I = [U, q_bar, p_bar](const auto& q, const auto& p, const auto& t) {
    const auto pb = p_bar(q, p, t);
    return pb * pb / 2.0 + U(q_bar(q, t));
  };

  Guard cg = g;
  cg.exclude_near("p_bar", [p_bar](const PhaseState& s) { return p_bar(s.q, s.p, s.t); },
                  setup.singular_guard);

  FamilyInstance fam{
      .label = "quadratic",
      .kind = FamilyKind::quadratic,
      .window = setup.window,
      .potential = PotentialSpec::analytic(V, g),
      .compat = ScalarField::analytic(C, cg),
      .invariant = ScalarField::analytic<2>(I, g),
      .aux = {},
      .reduction = Reduction{"I", ScalarField::analytic(I, g), [](double, double) { return 0.0; }},
      .abel = std::nullopt,
      .time_quadratures = {},
  };
  fam.aux["q_bar"] = [q_bar](const PhaseState& x) { return q_bar(x.q, x.t); };
  fam.aux["p_bar"] = [p_bar](const PhaseState& x) { return p_bar(x.q, x.p, x.t); };
  return fam;
}

double giacomini_potential(const SpaceProfile& c2, const SpaceProfile& W, double q, double t) {
  const double center = W(q);
  if (t == 0.0) return center;
  auto g = [&](double v) { return v - W(q - c2(v) * t); };

  Bracket b;
  try {
    b = expand_bracket(g, center, std::ldexp(std::max(1.0, std::abs(center)), -10), 30);
  } catch (const BracketError& e) {
    throw DomainError(std::string("implicit potential not bracketed: ") + e.what());
  }
  if (b.ambiguous) {
    throw ShockError("implicit potential has several roots near W(q): characteristics crossed");
  }
  double v = b.lo;
  if (b.lo != b.hi) {
    const double tol =
        4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(b.lo), std::abs(b.hi)});
    try {
      v = find_root(g, b.lo, b.hi, tol);
    } catch (const Error& e) {
      throw DomainError(std::string("implicit potential did not converge: ") + e.what());
    }
  }
  const double den = 1.0 + W.eval(q - c2(v) * t, 1) * c2.eval(v, 1) * t;
  if (den <= 1e-8) {
    throw ShockError("characteristics of the implicit potential have crossed");
  }
  return v;
}

namespace {

struct ImplicitPotential {
  SpaceProfile c2;
  SpaceProfile W;

  template <class S>
  S operator()(const S& q, const S& t) const {
    if constexpr (std::is_same_v<S, double>) {
      return giacomini_potential(c2, W, q, t);
    } else {
      // Implicit differentiation of V = W(q - c(V) t).
      using T = typename S::value_type;
      const T v = (*this)(q.v, t.v);
      const T c = c2(v);
      const T w1 = W.eval(q.v - c * t.v, 1);
      const T den = 1.0 + w1 * c2.eval(v, 1) * t.v;
      return chain(q, t, v, T(w1 / den), T(-c * w1 / den));
    }
  }
};

template <class Potential>
FamilyInstance giacomini_with(const SpaceProfile& c2, const SpaceProfile& W, Potential V,
                              Guard g, const FamilySetup& setup) {
  auto C = [c2, V](const auto& q, const auto& p, const auto& t) {
    return -d_dq(V, q, t) / (p - c2(V(q, t)));
  };
  Guard cg = g;
  cg.exclude_near(
      "p - C2(V)", [c2, V](const PhaseState& s) { return s.p - c2(V(s.q, s.t)); },
      setup.singular_guard);

  std::optional<ScalarField> invariant;
  if (c2.is_constant()) {
    const double c = c2(0.0);
    invariant = ScalarField::analytic<2>(
        [c, V](const auto& q, const auto& p, const auto& t) {
          return (p - c) * (p - c) / 2.0 + V(q, t);
        },
        g);
  }

  FamilyInstance fam{
      .label = "giacomini",
      .kind = FamilyKind::giacomini,
      .window = setup.window,
      .potential = PotentialSpec::analytic(V, g),
      .compat = ScalarField::analytic(C, cg),
      .invariant = std::move(invariant),
      .aux = {},
      .reduction = std::nullopt,
      .abel = std::nullopt,
      .time_quadratures = {},
  };
  fam.aux["V"] = [V](const PhaseState& x) { return V(x.q, x.t); };
  fam.aux["implicit_residual"] = [c2, W, V](const PhaseState& x) {
    const double v = V(x.q, x.t);
    return std::abs(v - W(x.q - c2(v) * x.t));
  };
  return fam;
}

}  // namespace

FamilyInstance giacomini(const SpaceProfile& c2, const SpaceProfile& W,
                         const FamilySetup& setup) {
  if (c2.is_constant()) {
    const double c = c2(0.0);
    auto V = [c, W](const auto& q, const auto& t) { return W(q - c * t); };
    return giacomini_with(c2, W, V, Guard{}, setup);
  }
  Guard g;
  g.require("implicit potential", [c2, W](const PhaseState& s) {
    try {
      giacomini_potential(c2, W, s.q, s.t);
      return true;
    } catch (const DomainError&) {
      return false;
    }
  });
  return giacomini_with(c2, W, ImplicitPotential{c2, W}, std::move(g), setup);
}

namespace {

// Time-dependent coefficients of the Abel family.
struct AbelTime {
  TimeFunction rho;
  double k;
  InverseSquareIntegral T;
  std::shared_ptr<const CumulativeQuadrature> G;

  template <class S>
  S E(const S& t) const {
    return (T(t) + k) / k;
  }

  template <class S>
  S K(const S& t, const S& Tv) const {
    const auto r = rho.eval(t);
    const auto r1 = rho.eval(t, 1);
    const auto r2 = rho.eval(t, 2);
    return rho.eval(t, 3) / r + 3.0 * r1 * r2 / (r * r) + 2.0 * r2 / (r * r * r * (Tv + k));
  }

  // rho^4 E^2 K, the integrand of G, given T's value.
  template <class S>
  S g_rate(const S& t, const S& Tv) const {
    const auto r = rho.eval(t);
    const auto e = (Tv + k) / k;
    return r * r * r * r * e * e * K(t, Tv);
  }

  template <class S>
  S gamma(const S& t) const {
    return lift(
        t,
        [this](double s) {
          const double r = rho(s);
          return -(*G)(s) / (2.0 * r * r);
        },
        [this](const auto& s) { return gamma_rate(s); });
  }

  template <class S>
  S gamma_rate(const S& t) const {
    const auto r = rho.eval(t);
    const auto e = E(t);
    return -2.0 * (rho.eval(t, 1) / r) * gamma(t) - r * r * e * e * K(t, T(t)) / 2.0;
  }
};

}  // namespace

FamilyInstance abel_family(const TimeFunction& rho, double k, const SpaceProfile& U,
                           const FamilySetup& setup) {
  if (k == 0.0 || !std::isfinite(k)) throw ContractError("k must be finite and nonzero");
  require_nonzero(rho, setup.window, "rho", setup.rho_guard);

  const InverseSquareIntegral T{rho, inverse_square_integral(rho, setup.window)};
  {
    double lowest = std::numeric_limits<double>::infinity();
    double first = 0.0;
    bool sign_change = false;
    for (std::size_t i = 0; i < kGuardSamples; ++i) {
      const double t = setup.window.t0 + setup.window.length() * static_cast<double>(i) /
                                             static_cast<double>(kGuardSamples - 1);
      const double m = T(t) + k;
      if (i == 0) first = m;
      sign_change = sign_change || (m > 0.0) != (first > 0.0);
      lowest = std::min(lowest, std::abs(m));
    }
    if (sign_change || !(lowest >= setup.singular_guard)) {
      throw ConstructionError("T + k comes within " + std::to_string(lowest) +
                              " of zero on the window");
    }
  }

  AbelTime at{rho, k, T, nullptr};
  at.G = std::make_shared<const CumulativeQuadrature>(
      [at](double s) { return at.g_rate(s, at.T(s)); }, 0.0, setup.window);

  Guard g = rho_guard(rho, setup.rho_guard);
  g.exclude_near("T + k", [T, k](const PhaseState& s) { return T(s.t) + k; },
                 setup.singular_guard);

  auto q_bar = [at](const auto& q, const auto& t) { return q / (at.rho.eval(t) * at.E(t)); };
  auto p_bar = [at](const auto& q, const auto& p, const auto& t) {
    const auto r = at.rho.eval(t);
    return r * p - at.rho.eval(t, 1) * q - q / (r * (at.T(t) + at.k));
  };
  auto V = [at, U, q_bar](const auto& q, const auto& t) {
    const auto r = at.rho.eval(t);
    const auto qb = q_bar(q, t);
    return at.gamma(t) * qb * qb + U(qb) / (r * r);
  };
  auto C = [at, V, p_bar](const auto& q, const auto& p, const auto& t) {
    const auto r = at.rho.eval(t);
    return at.rho.eval(t, 1) / r - (r * d_dq(V, q, t) + at.rho.eval(t, 2) * q) / p_bar(q, p, t);
  };
  auto slope = [at, U](double qb, double pb, double t) {
    const double r = at.rho(t);
    const double e = at.E(t);
    return -(e * pb / (at.T(t) + at.k) + r * r * r * at.rho.eval(t, 2) * e * e * qb +
             2.0 * r * r * at.gamma(t) * qb + U.eval(qb, 1)) /
           pb;
  };
  auto to_state = [at](double qb, double pb, double t) {
    const double r = at.rho(t);
    const double q = qb * r * at.E(t);
    return PhaseState{q, (pb + at.rho.eval(t, 1) * q + q / (r * (at.T(t) + at.k))) / r, t};
  };

  Guard cg = g;
  cg.exclude_near("p_bar", [p_bar](const PhaseState& s) { return p_bar(s.q, s.p, s.t); },
                  setup.singular_guard);

  std::vector<TimeQuadrature> quadratures{inverse_square_quadrature(T)};
  quadratures.push_back({"G", [at](double t) { return (*at.G)(t); },
                         {"G", 0.0, [at](const PhaseState& x, std::span<const double> aux) {
                            return at.g_rate(x.t, aux[0]);
                          }}});
  quadratures.push_back({"log_E", [at](double t) { return std::log(at.E(t)); },
                         {"log_E", 0.0, [at](const PhaseState& x, std::span<const double> aux) {
                            const double r = at.rho(x.t);
                            return 1.0 / (r * r * (aux[0] + at.k));
                          }}});

  FamilyInstance fam{
      .label = "abel",
      .kind = FamilyKind::abel,
      .window = setup.window,
      .potential = PotentialSpec::analytic(V, g),
      .compat = ScalarField::analytic(C, cg),
      .invariant = std::nullopt,
      .aux = {},
      .reduction = std::nullopt,
      .abel = AbelCharacteristic{ScalarField::analytic(
                                     [q_bar](const auto& q, const auto&, const auto& t) {
                                       return q_bar(q, t);
                                     },
                                     g),
                                 ScalarField::analytic(p_bar, g), slope, to_state},
      .time_quadratures = std::move(quadratures),
  };
  fam.aux["T"] = [at](const PhaseState& x) { return at.T(x.t); };
  fam.aux["E"] = [at](const PhaseState& x) { return at.E(x.t); };
  fam.aux["Gamma"] = [at](const PhaseState& x) { return at.gamma(x.t); };
  fam.aux["Q"] = [at](const PhaseState& x) {
    return x.q / (at.rho(x.t) * (at.T(x.t) + at.k));
  };
  fam.aux["q_bar"] = [q_bar](const PhaseState& x) { return q_bar(x.q, x.t); };
  fam.aux["p_bar"] = [p_bar](const PhaseState& x) { return p_bar(x.q, x.p, x.t); };
  return fam;
}

FamilyInstance autonomous(const SpaceProfile& U, const FamilySetup& setup) {
  auto V = [U](const auto& q, const auto&) { return U(q); };
  auto J = [U](const auto& q, const auto& p, const auto&) { return p * p / 2.0 + U(q); };
  ScalarField invariant = ScalarField::analytic<2>(J);
  FamilyInstance fam{
      .label = "inverse",
      .kind = FamilyKind::inverse,
      .window = setup.window,
      .potential = PotentialSpec::analytic(V),
      .compat = compatible_from_invariant(invariant, setup.singular_guard),
      .invariant = invariant,
      .aux = {},
      .reduction = Reduction{"J", invariant, [](double, double) { return 0.0; }},
      .abel = std::nullopt,
      .time_quadratures = {},
  };
  return fam;
}

double solve_Q(const SpaceProfile& F, const TimeFunction& rho, const TimeFunction& sigma,
               double q, double t) {
  const double T = t == 0.0 ? 0.0
                            : quad(
                                  [&rho](double s) {
                                    const double r = rho(s);
                                    return 1.0 / (r * r);
                                  },
                                  0.0, t, 1e-14);
  const double s0 = (q - sigma(t)) / rho(t);
  auto fn = [&](double Q) { return Q - F(s0 - Q * T); };
  const double center = F(s0);
  const Bracket b = expand_bracket(fn, center, std::ldexp(std::max(1.0, std::abs(center)), -10), 30);
  if (b.ambiguous) throw BracketError("several roots straddle F((q - sigma) / rho)");
  if (b.lo == b.hi) return b.lo;
  const double scale = std::max({std::abs(b.lo), std::abs(b.hi), std::numeric_limits<double>::min()});
  return find_root(fn, b.lo, b.hi, 1e-12 * scale);
}

}  // namespace frobenius
