#include "frobenius/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace frobenius {

double Axis::at(std::size_t i) const {
  if (count <= 1) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

PhaseState GridSpec::state(std::size_t index) const {
  const std::size_t it = index % t.count;
  const std::size_t ip = (index / t.count) % p.count;
  const std::size_t iq = index / (t.count * p.count);
  return {q.at(iq), p.at(ip), t.at(it)};
}

void GridSpec::validate() const {
  for (const Axis* a : {&q, &p, &t}) {
    if (a->count == 0) throw ContractError("grid axis has no points");
    if (!std::isfinite(a->lo) || !std::isfinite(a->hi)) {
      throw ContractError("grid axis bounds must be finite");
    }
    if (a->hi < a->lo) throw ContractError("grid axis has hi < lo");
  }
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each call owns its
// output slot, so results do not depend on scheduling. The exception of the
// lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Uniform double in [lo, hi] from the top 53 bits, identical on every platform.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double quantile(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) return 0.0;
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, sorted.size() - 1);
  return sorted[i] + (pos - static_cast<double>(i)) * (sorted[j] - sorted[i]);
}

// Basic-equation residual from values of V and C alone, with the size of its
// largest term for scaling.
std::pair<double, double> fd_residual(const PotentialSpec& V, const ScalarField& C,
                                      const PhaseState& x, double h) {
  auto c = [&](double q, double p, double t) { return C.value({q, p, t}); };
  auto v = [&](double q, double t) { return V.value(q, t); };
  const double c0 = c(x.q, x.p, x.t);
  const double c_q = (c(x.q + h, x.p, x.t) - c(x.q - h, x.p, x.t)) / (2 * h);
  const double c_p = (c(x.q, x.p + h, x.t) - c(x.q, x.p - h, x.t)) / (2 * h);
  const double c_t = (c(x.q, x.p, x.t + h) - c(x.q, x.p, x.t - h)) / (2 * h);
  const double v_q = (v(x.q + h, x.t) - v(x.q - h, x.t)) / (2 * h);
  const double v_qq = (v(x.q + h, x.t) - 2 * v(x.q, x.t) + v(x.q - h, x.t)) / (h * h);
  const double uc = c_t + x.p * c_q - v_q * c_p;
  const double scale = std::max({1.0, std::abs(uc), c0 * c0, std::abs(v_qq)});
  return {uc + c0 * c0 + v_qq, scale};
}

}  // namespace

ResidualReport residual_scan(const FamilyInstance& fam, const GridSpec& grid, double threshold,
                             const ScanOptions& options) {
  grid.validate();
  const Guard guard = fam.guard();
  ResidualReport report;
  report.grid = grid;
  report.threshold = threshold;
  report.points.resize(grid.size());

  parallel_for(grid.size(), options.threads, [&](std::size_t i) {
    ResidualPoint& pt = report.points[i];
    pt.x = grid.state(i);
    if (!guard.admits(pt.x)) return;
    try {
      pt.residual = std::abs(basic_equation_residual(fam.potential, fam.compat, pt.x));
      pt.included = true;
    } catch (const DomainError&) {
      pt.residual = 0.0;
    }
  });

  std::vector<double> values;
  values.reserve(report.points.size());
  double sum = 0.0;
  for (const auto& pt : report.points) {
    if (!pt.included) continue;
    values.push_back(pt.residual);
    sum += pt.residual;
  }
  report.included = values.size();
  report.excluded = report.points.size() - report.included;
  if (values.empty()) {
    throw DegenerateScanError("every grid point of the residual scan lies outside the guard");
  }
  std::sort(values.begin(), values.end());
  report.max_abs = values.back();
  report.mean_abs = sum / static_cast<double>(values.size());
  for (std::size_t k = 0; k < kQuantileLevels.size(); ++k) {
    report.quantiles[k] = quantile(values, kQuantileLevels[k]);
  }
  report.pass = report.max_abs < threshold;

  if (options.cross_check) {
    std::vector<std::size_t> included;
    for (std::size_t i = 0; i < report.points.size(); ++i) {
      if (report.points[i].included) included.push_back(i);
    }
    std::mt19937_64 rng(options.seed);
    FdCrossCheck cc;
    cc.step = options.cross_check_step;
    cc.threshold = options.cross_check_threshold;
    for (std::size_t k = 0; k < options.cross_check_points; ++k) {
      const std::size_t i = included[rng() % included.size()];
      const ResidualPoint& pt = report.points[i];
      try {
        const double analytic = basic_equation_residual(fam.potential, fam.compat, pt.x);
        const auto [fd, scale] = fd_residual(fam.potential, fam.compat, pt.x, cc.step);
        cc.max_abs_diff = std::max(cc.max_abs_diff, std::abs(fd - analytic) / scale);
        ++cc.points;
      } catch (const DomainError&) {
        // The stencil reached outside the potential's domain; skip the point.
      }
    }
    cc.pass = cc.points > 0 && cc.max_abs_diff < cc.threshold;
    report.cross_check = cc;
  }
  return report;
}

DriftReport drift_check(const FamilyInstance& fam, std::span<const PhaseState> inits, double t_end,
                        const IntegratorConfig& cfg, double threshold, std::size_t threads) {
  if (!fam.invariant) {
    throw UnsupportedCheckError("family '" + fam.label +
                                "' has no closed-form invariant; use residual_scan");
  }
  const ScalarField& I = *fam.invariant;
  const Guard guard = fam.invariant_guard();
  for (const auto& x : inits) {
    if (auto bad = guard.violation(x)) {
      throw DomainError("initial state outside the invariant guard (" + *bad + ")");
    }
  }

  DriftReport report;
  report.threshold = threshold;
  report.series.resize(inits.size());
  parallel_for(inits.size(), threads, [&](std::size_t i) {
    const Trajectory traj = integrate(fam.potential, inits[i], t_end, cfg, {}, &I.guard());
    DriftSeries& s = report.series[i];
    s.init = inits[i];
    s.guard_exit = traj.guard_exit;
    s.exit_reason = traj.exit_reason;
    const double i0 = I.value(inits[i]);
    const double scale = std::max(1.0, std::abs(i0));
    for (const auto& x : traj.samples) {
      const double value = I.value(x);
      const double drift = std::abs(value - i0) / scale;
      s.t.push_back(x.t);
      s.invariant.push_back(value);
      s.drift.push_back(drift);
      s.max_drift = std::max(s.max_drift, drift);
    }
  });
  for (const auto& s : report.series) report.max_drift = std::max(report.max_drift, s.max_drift);
  report.pass = !report.series.empty() && report.max_drift < threshold;
  return report;
}

ReductionReport riccati_consistency(const FamilyInstance& fam, const Trajectory& traj,
                                    double threshold) {
  if (!fam.reduction) {
    throw UnsupportedCheckError("family '" + fam.label + "' exposes no reduction");
  }
  if (traj.segments.empty()) {
    throw ContractError("reduction check needs a trajectory with dense output");
  }
  const Reduction& red = *fam.reduction;
  ReductionReport report;
  report.name = red.name;
  report.threshold = threshold;
  report.truncated = traj.guard_exit;

  for (const auto& seg : traj.segments) {
    const double tm = seg.x0 + 0.5 * seg.h;
    const auto y = seg.state(tm);
    const auto dy = seg.derivative(tm);
    const PhaseState x{y[0], y[1], tm};
    if (!red.f.admits(x)) continue;
    const FieldJet fj = red.f.jet(x);
    ReductionPoint pt;
    pt.t = tm;
    pt.f = fj.value;
    pt.dfdt = fj.d_t + fj.d_q * dy[0] + fj.d_p * dy[1];
    pt.rate = red.rate(fj.value, tm);
    pt.residual = std::abs(pt.dfdt - pt.rate);
    report.max_residual = std::max(report.max_residual, pt.residual);
    report.points.push_back(pt);
  }
  report.pass = !report.points.empty() && report.max_residual < threshold;
  return report;
}

AbelReport abel_characteristic_check(const FamilyInstance& fam, double t_fixed, double q_bar_lo,
                                     double q_bar_hi, double threshold,
                                     std::span<const double> p_bar_starts, std::size_t samples) {
  if (!fam.abel) {
    throw UnsupportedCheckError("family '" + fam.label + "' has no Abel characteristic");
  }
  if (samples < 2) throw ContractError("Abel check needs at least two samples per curve");
  const AbelCharacteristic& ab = *fam.abel;
  const ScalarField& C = fam.compat;
  const Guard guard = fam.guard();

  AbelReport report;
  report.t_fixed = t_fixed;
  report.threshold = threshold;

  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-13;
  cfg.dense_output = true;

  const double q_end = ab.to_state(q_bar_hi, 0.0, t_fixed).q;
  for (double pb0 : p_bar_starts) {
    const PhaseState start = ab.to_state(q_bar_lo, pb0, t_fixed);
    if (!guard.admits(start)) {
      report.excluded += samples;
      continue;
    }
    const OdeRhs rhs = [&](double q, std::span<const double> y, std::span<double> dy) {
      const PhaseState x{q, y[0], t_fixed};
      if (!guard.admits(x)) throw DomainError("left the compatible field's guard");
      dy[0] = C.value(x);
    };
    const OdeStop stop = [&](double qa, std::span<const double> ya, double qb,
                             std::span<const double> yb) -> std::optional<std::string> {
      const PhaseState a{qa, ya[0], t_fixed}, b{qb, yb[0], t_fixed};
      if (!guard.admits(b) || guard.crossed(a, b)) return "guard";
      return std::nullopt;
    };
    const OdeSolution sol = solve_ode(rhs, start.q, {start.p}, q_end, cfg, stop);

    for (std::size_t k = 0; k < samples; ++k) {
      const double q =
          start.q + (q_end - start.q) * static_cast<double>(k) / static_cast<double>(samples - 1);
      const auto seg = std::find_if(sol.segments.begin(), sol.segments.end(),
                                    [q](const DenseSegment& s) { return s.covers(q); });
      if (seg == sol.segments.end()) {
        ++report.excluded;
        continue;
      }
      const double p = seg->state(q)[0];
      const PhaseState x{q, p, t_fixed};
      if (!guard.admits(x)) {
        ++report.excluded;
        continue;
      }
      const double dpdq = C.value(x);
      const FieldJet qj = ab.q_bar.jet(x);
      const FieldJet pj = ab.p_bar.jet(x);
      AbelPoint pt;
      pt.q_bar = qj.value;
      pt.p_bar = pj.value;
      pt.traced = (pj.d_q + pj.d_p * dpdq) / (qj.d_q + qj.d_p * dpdq);
      pt.predicted = ab.slope(pt.q_bar, pt.p_bar, t_fixed);
      pt.error = std::abs(pt.traced - pt.predicted) / std::max(1.0, std::abs(pt.predicted));
      report.max_error = std::max(report.max_error, pt.error);
      report.points.push_back(pt);
    }
  }
  report.pass = !report.points.empty() && report.max_error < threshold;
  return report;
}

InverseReport inverse_roundtrip(const PotentialSpec& V, const ScalarField& J,
                                std::span<const PhaseState> samples, double threshold,
                                double delta_p) {
  const ScalarField C = compatible_from_invariant(J, delta_p);
  const Guard guard = V.guard() & C.guard();
  InverseReport report;
  report.samples = samples.size();
  report.threshold = threshold;
  for (const auto& x : samples) {
    if (!guard.admits(x)) {
      ++report.excluded;
      continue;
    }
    ++report.included;
    report.max_residual =
        std::max(report.max_residual, std::abs(basic_equation_residual(V, C, x)));
    report.max_tangency = std::max(report.max_tangency, std::abs(apply_v(C, J, x)));
  }
  if (report.included == 0) {
    throw DegenerateScanError("every inverse round-trip sample lies outside the guard");
  }
  report.pass = report.max_residual < threshold && report.max_tangency < threshold;
  return report;
}

std::vector<PhaseState> sample_states(const Guard& guard, const SampleBox& box, std::size_t n,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PhaseState> out;
  out.reserve(n);
  while (out.size() < n) {
    std::size_t tries = 0;
    for (;;) {
      const PhaseState x{uniform(rng, box.q.lo, box.q.hi), uniform(rng, box.p.lo, box.p.hi),
                         uniform(rng, box.t.lo, box.t.hi)};
      if (guard.admits(x)) {
        out.push_back(x);
        break;
      }
      if (++tries >= kMaxSampleRetries) {
        throw DegenerateScanError("no admitted state found after " +
                                  std::to_string(kMaxSampleRetries) + " draws");
      }
    }
  }
  return out;
}

AuxAgreementReport aux_agreement(const FamilyInstance& fam, const Trajectory& traj,
                                 double threshold) {
  if (traj.aux_names.size() != fam.time_quadratures.size()) {
    throw ContractError("trajectory was not integrated with the family's auxiliaries");
  }
  AuxAgreementReport report;
  report.threshold = threshold;
  for (std::size_t k = 0; k < fam.time_quadratures.size(); ++k) {
    const auto& tq = fam.time_quadratures[k];
    double worst = 0.0;
    for (std::size_t s = 0; s < traj.samples.size(); ++s) {
      worst = std::max(worst, std::abs(traj.aux[s][k] - tq.pointwise(traj.samples[s].t)));
    }
    report.names.push_back(tq.name);
    report.max_abs_diff.push_back(worst);
    report.max_abs = std::max(report.max_abs, worst);
  }
  report.pass = report.max_abs < threshold;
  return report;
}

}  // namespace frobenius
