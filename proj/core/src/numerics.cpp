#include "frobenius/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace frobenius {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw ContractError("integrator tolerances must be positive");
  }
  if (!(max_step > 0.0)) throw ContractError("integrator max_step must be positive");
  if (max_steps == 0) throw ContractError("integrator max_steps must be positive");
}

namespace {

// Dormand-Prince 5(4) tableau with the continuous extension of Hairer,
// Norsett and Wanner (Solving ODEs I, section II.6).
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

using Vec = std::vector<double>;

bool all_finite(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Evaluates rhs, mapping DomainError to a non-finite result.
bool evaluate(const OdeRhs& rhs, double x, const Vec& y, Vec& out) {
  try {
    rhs(x, y, out);
  } catch (const DomainError&) {
    return false;
  }
  return all_finite(out);
}

double scale_of(const IntegratorConfig& cfg, double a, double b) {
  return cfg.abs_tol + cfg.rel_tol * std::max(std::abs(a), std::abs(b));
}

// Starting step heuristic (Hairer's HINIT) for a fifth-order method.
double initial_step(const OdeRhs& rhs, double x, const Vec& y, const Vec& f0, double direction,
                    double hmax, const IntegratorConfig& cfg) {
  const std::size_t n = y.size();
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = scale_of(cfg, y[i], y[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);

  Vec y1(n), f1(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + direction * h * f0[i];
  if (!evaluate(rhs, x + direction * h, y1, f1)) return std::min(1e-6, hmax);
  double der2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = scale_of(cfg, y[i], y[i]);
    der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 =
      der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 5.0);
  return std::min({100.0 * h, h1, hmax});
}

}  // namespace

bool DenseSegment::covers(double x) const {
  const double lo = std::min(x0, x1()), hi = std::max(x0, x1());
  return x >= lo && x <= hi;
}

std::vector<double> DenseSegment::state(double x) const {
  const double s = (x - x0) / h;
  const double s1 = 1.0 - s;
  std::vector<double> out(coeff[0].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = coeff[0][i] +
             s * (coeff[1][i] + s1 * (coeff[2][i] + s * (coeff[3][i] + s1 * coeff[4][i])));
  }
  return out;
}

std::vector<double> DenseSegment::derivative(double x) const {
  const double s = (x - x0) / h;
  const double s1 = 1.0 - s;
  std::vector<double> out(coeff[0].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // P = r0 + s D,  D = r1 + s1 B,  B = r2 + s A,  A = r3 + s1 r4.
    const double A = coeff[3][i] + s1 * coeff[4][i];
    const double dA = -coeff[4][i];
    const double B = coeff[2][i] + s * A;
    const double dB = A + s * dA;
    const double D = coeff[1][i] + s1 * B;
    const double dD = -B + s1 * dB;
    out[i] = (D + s * dD) / h;
  }
  return out;
}

OdeSolution solve_ode(const OdeRhs& rhs, double x0, std::vector<double> y0, double x1,
                      const IntegratorConfig& cfg, const OdeStop& stop) {
  cfg.validate();
  const std::size_t n = y0.size();
  OdeSolution sol;
  sol.x.push_back(x0);
  sol.y.push_back(y0);
  if (x1 == x0) return sol;

  const double direction = x1 > x0 ? 1.0 : -1.0;
  const double span = std::abs(x1 - x0);
  const double hmax = std::min(cfg.max_step, span);
  constexpr double uround = std::numeric_limits<double>::epsilon();

  Vec y = std::move(y0);
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  if (!evaluate(rhs, x0, y, k1)) {
    throw DomainError("right-hand side is undefined at the initial point");
  }

  double x = x0;
  double h = initial_step(rhs, x, y, k1, direction, hmax, cfg);
  bool last_failure_domain = false;
  std::size_t steps = 0;

  while (direction * (x1 - x) > 0.0) {
    if (steps++ >= cfg.max_steps) {
      throw BudgetError("integrator exceeded " + std::to_string(cfg.max_steps) + " steps");
    }
    if (h * 0.1 <= std::abs(x) * uround || h < 16.0 * uround * std::max(1.0, std::abs(x))) {
      if (last_failure_domain) {
        sol.stopped = true;
        sol.stop_reason = "right-hand side left its domain";
        return sol;
      }
      throw StiffnessError("step size underflow at x = " + std::to_string(x));
    }
    if ((x + direction * 1.01 * h - x1) * direction > 0.0) h = std::abs(x1 - x);
    const double hs = direction * h;

    bool ok = true;
    auto stage = [&](Vec& k, double cx, auto&& combine) {
      if (!ok) return;
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * combine(i);
      ok = evaluate(rhs, x + cx * hs, ytmp, k);
    };
    stage(k2, c2, [&](std::size_t i) { return a21 * k1[i]; });
    stage(k3, c3, [&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
    stage(k4, c4, [&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
    stage(k5, c5, [&](std::size_t i) {
      return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
    });
    stage(k6, 1.0, [&](std::size_t i) {
      return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
    });
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) {
        ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                               a76 * k6[i]);
      }
      ok = all_finite(ynew) && evaluate(rhs, x + hs, ynew, k7);
    }
    if (!ok) {
      last_failure_domain = true;
      ++sol.rejected_steps;
      h *= 0.25;
      continue;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
      const double sk = scale_of(cfg, y[i], ynew[i]);
      err += (e / sk) * (e / sk);
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (!(err <= 1.0)) {
      last_failure_domain = false;
      ++sol.rejected_steps;
      const double fac = std::isfinite(err) ? std::max(kMinFactor, kSafety * std::pow(err, -0.2))
                                            : kMinFactor;
      h *= std::min(1.0, fac);
      continue;
    }

    const double xnew = x + hs;
    if (stop) {
      if (auto reason = stop(x, y, xnew, ynew)) {
        sol.stopped = true;
        sol.stop_reason = *reason;
        return sol;
      }
    }

    if (cfg.dense_output) {
      DenseSegment seg;
      seg.x0 = x;
      seg.h = hs;
      for (auto& c : seg.coeff) c.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = hs * k1[i] - ydiff;
        seg.coeff[0][i] = y[i];
        seg.coeff[1][i] = ydiff;
        seg.coeff[2][i] = bspl;
        seg.coeff[3][i] = ydiff - hs * k7[i] - bspl;
        seg.coeff[4][i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                                d7 * k7[i]);
      }
      sol.segments.push_back(std::move(seg));
    }

    ++sol.accepted_steps;
    last_failure_domain = false;
    x = xnew;
    y = ynew;
    k1 = k7;
    sol.x.push_back(x);
    sol.y.push_back(y);

    const double fac = err == 0.0 ? kMaxFactor
                                  : std::clamp(kSafety * std::pow(err, -0.2), kMinFactor, kMaxFactor);
    h = std::min(h * fac, hmax);
  }
  return sol;
}

std::optional<std::size_t> Trajectory::segment_at(double t) const {
  if (segments.empty()) return std::nullopt;
  auto it = std::lower_bound(segments.begin(), segments.end(), t,
                             [](const DenseSegment& s, double v) { return s.x1() < v; });
  if (it == segments.end()) return std::nullopt;
  if (!it->covers(t)) return std::nullopt;
  return static_cast<std::size_t>(it - segments.begin());
}

PhaseState Trajectory::state_at(double t) const {
  const auto idx = segment_at(t);
  if (!idx) throw ContractError("trajectory has no dense output covering t");
  const auto y = segments[*idx].state(t);
  return {y[0], y[1], t};
}

std::array<double, 2> Trajectory::rate_at(double t) const {
  const auto idx = segment_at(t);
  if (!idx) throw ContractError("trajectory has no dense output covering t");
  const auto dy = segments[*idx].derivative(t);
  return {dy[0], dy[1]};
}

Trajectory integrate(const PotentialSpec& V, const PhaseState& init, double t_end,
                     const IntegratorConfig& cfg, std::span<const AuxOde> aux,
                     const Guard* stop_guard) {
  if (!init.finite()) throw ContractError("initial state must be finite");
  if (!(t_end > init.t)) throw ContractError("t_end must exceed the initial time");
  if (auto bad = V.guard().violation({init.q, 0.0, init.t})) {
    throw DomainError("initial state outside potential guard (" + *bad + ")");
  }
  if (stop_guard) {
    if (auto bad = stop_guard->violation(init)) {
      throw DomainError("initial state outside guard (" + *bad + ")");
    }
  }

  std::vector<double> y0{init.q, init.p};
  for (const auto& a : aux) y0.push_back(a.initial);

  OdeRhs rhs = [&V, aux](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -V.d_q(y[0], t);
    if (!aux.empty()) {
      const PhaseState x{y[0], y[1], t};
      const auto aux_state = y.subspan(2);
      for (std::size_t i = 0; i < aux.size(); ++i) dy[2 + i] = aux[i].rhs(x, aux_state);
    }
  };

  OdeStop stop = [&V, stop_guard](double t0, std::span<const double> ya, double t1,
                                  std::span<const double> yb) -> std::optional<std::string> {
    const PhaseState a{ya[0], ya[1], t0}, b{yb[0], yb[1], t1};
    const PhaseState aq{a.q, 0.0, a.t}, bq{b.q, 0.0, b.t};
    if (auto bad = V.guard().violation(bq)) return "potential guard: " + *bad;
    if (V.guard().crossed(aq, bq)) return "potential guard crossed";
    if (stop_guard) {
      if (auto bad = stop_guard->violation(b)) return "guard: " + *bad;
      if (stop_guard->crossed(a, b)) return "guard crossed";
    }
    return std::nullopt;
  };

  OdeSolution sol = solve_ode(rhs, init.t, std::move(y0), t_end, cfg, stop);

  Trajectory traj;
  traj.rel_tol = cfg.rel_tol;
  traj.abs_tol = cfg.abs_tol;
  traj.accepted_steps = sol.accepted_steps;
  traj.rejected_steps = sol.rejected_steps;
  traj.guard_exit = sol.stopped;
  traj.exit_reason = sol.stop_reason;
  traj.segments = std::move(sol.segments);
  for (const auto& a : aux) traj.aux_names.push_back(a.name);
  traj.samples.reserve(sol.x.size());
  traj.aux.reserve(sol.x.size());
  for (std::size_t i = 0; i < sol.x.size(); ++i) {
    traj.samples.push_back({sol.y[i][0], sol.y[i][1], sol.x[i]});
    traj.aux.emplace_back(sol.y[i].begin() + 2, sol.y[i].end());
  }
  return traj;
}

namespace {

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

// One non-adaptive Gauss-Kronrod (7/15) panel. Boost reports the error of
// the rule on the reference interval [-1, 1], so rescale it to [a, b].
Panel gk15(const std::function<double(double)>& fn, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  Panel panel{a, b};
  panel.value = GK::integrate(fn, a, b, 0, 0.0, &panel.error, &panel.l1);
  panel.error *= std::abs(b - a) / 2.0;
  return panel;
}

constexpr std::size_t kMaxPanels = 4096;

}  // namespace

double quad(const std::function<double(double)>& fn, double a, double b, double tol) {
  if (!(tol > 0.0)) throw ContractError("quadrature tolerance must be positive");
  if (a == b) return 0.0;
  // Roundoff floor: GK never reports less than 2 eps |integral| per panel.
  constexpr double floor_rel = 64.0 * std::numeric_limits<double>::epsilon();
  const auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };

  std::vector<Panel> heap{gk15(fn, a, b)};
  double value = heap.front().value, error = heap.front().error, l1 = heap.front().l1;
  const auto done = [&] {
    return error <= std::max(tol * std::max(1.0, l1), floor_rel * l1);
  };
  while (!done() && heap.size() < kMaxPanels) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) break;
    for (const Panel& half : {gk15(fn, worst.a, mid), gk15(fn, mid, worst.b)}) {
      heap.push_back(half);
      std::push_heap(heap.begin(), heap.end(), worse);
    }
    // Re-sum so cancellation in running totals cannot accumulate.
    value = error = l1 = 0.0;
    for (const Panel& p : heap) {
      value += p.value;
      error += p.error;
      l1 += p.l1;
    }
  }
  if (!std::isfinite(value)) throw ConvergenceError("quadrature produced a non-finite value");
  if (!done()) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "quadrature on [" << a << ", " << b << "] stalled at error "
        << std::setprecision(3) << error << " against target " << tol * std::max(1.0, l1);
    throw ConvergenceError(msg.str());
  }
  return value;
}

double find_root(const std::function<double(double)>& fn, double lo, double hi, double tol,
                 std::size_t max_iter) {
  if (!(tol > 0.0)) throw ContractError("root tolerance must be positive");
  if (lo > hi) std::swap(lo, hi);
  const double flo = fn(lo), fhi = fn(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi)) {
    throw BracketError("function is not finite at the bracket ends");
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw BracketError("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "]");
  }
  std::uintmax_t iters = max_iter;
  auto done = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  const auto [a, b] = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, done, iters);
  if (!done(a, b)) {
    throw ConvergenceError("root finder did not converge within " + std::to_string(max_iter) +
                           " iterations");
  }
  if (a == b) return a;
  // Prefer whichever end has the smaller residual.
  const double fa = fn(a), fb = fn(b);
  return std::abs(fa) <= std::abs(fb) ? a : b;
}

Bracket expand_bracket(const std::function<double(double)>& fn, double center, double width,
                       int max_doublings) {
  if (!(width > 0.0)) throw ContractError("bracket width must be positive");
  const double fc = fn(center);
  if (fc == 0.0) return {center, center, false};
  double w = width;
  for (int i = 0; i <= max_doublings; ++i, w *= 2.0) {
    const double lo = center - w, hi = center + w;
    const double flo = fn(lo), fhi = fn(hi);
    const bool left = std::isfinite(flo) && (flo > 0.0) != (fc > 0.0);
    const bool right = std::isfinite(fhi) && (fhi > 0.0) != (fc > 0.0);
    if (left && right) return {lo, hi, true};
    if (left) return {lo, center, false};
    if (right) return {center, hi, false};
  }
  throw BracketError("no sign change within " + std::to_string(w / 2.0) + " of " +
                     std::to_string(center));
}

CumulativeQuadrature::CumulativeQuadrature(std::function<double(double)> integrand, double origin,
                                           TimeWindow span, std::size_t panels, double tol)
    : f_(std::move(integrand)), origin_(origin), tol_(tol) {
  const double lo = std::min(origin, span.t0);
  const double hi = std::max(origin, span.t1);
  if (panels == 0) panels = 1;
  nodes_.push_back(origin);
  for (std::size_t i = 0; i <= panels; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(panels);
    if (t != origin) nodes_.push_back(t);
  }
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

  values_.assign(nodes_.size(), 0.0);
  const auto o = static_cast<std::size_t>(
      std::find(nodes_.begin(), nodes_.end(), origin) - nodes_.begin());
  for (std::size_t i = o + 1; i < nodes_.size(); ++i) {
    values_[i] = values_[i - 1] + quad(f_, nodes_[i - 1], nodes_[i], tol_);
  }
  for (std::size_t i = o; i-- > 0;) {
    values_[i] = values_[i + 1] - quad(f_, nodes_[i], nodes_[i + 1], tol_);
  }
}

double CumulativeQuadrature::operator()(double t) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
  std::size_t i;
  if (it == nodes_.end()) {
    i = nodes_.size() - 1;
  } else if (it == nodes_.begin()) {
    i = 0;
  } else {
    const auto j = static_cast<std::size_t>(it - nodes_.begin());
    i = (t - nodes_[j - 1] <= nodes_[j] - t) ? j - 1 : j;
  }
  return values_[i] + quad(f_, nodes_[i], t, tol_);
}

}  // namespace frobenius
