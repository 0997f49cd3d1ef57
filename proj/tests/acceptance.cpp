// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "frobenius/verify.hpp"

#ifdef FROBENIUS_HAVE_CLI
#include "commands.hpp"
#endif

using namespace frobenius;

namespace {

const TimeFunction kOne = TimeFunction::constant(1.0);
const TimeFunction kZero = TimeFunction::constant(0.0);
const TimeFunction kCos = TimeFunction::trigonometric(0, 1, 1, 0);
const TimeFunction kTwoPlusCos = TimeFunction::trigonometric(2, 1, 1, 0);
const TimeFunction kSin = TimeFunction::trigonometric(0, 1, 1, -std::numbers::pi / 2);
const TimeFunction kSlowGrowth = TimeFunction::polynomial({1, 0, 0.1});

FamilySetup window(double t0, double t1) {
  FamilySetup s;
  s.window = {t0, t1};
  return s;
}

IntegratorConfig tolerance(double rel, bool dense = false) {
  IntegratorConfig cfg;
  cfg.rel_tol = rel;
  cfg.abs_tol = rel * 1e-2;
  cfg.dense_output = dense;
  return cfg;
}

SampleBox box(double qlo, double qhi, double plo, double phi, double t0 = 0.0) {
  return {{qlo, qhi, 1}, {plo, phi, 1}, {t0, t0, 1}};
}

GridSpec grid_on(double t1, double qlo = -2, double qhi = 2) {
  GridSpec g;
  g.q = {qlo, qhi, 10};
  g.t = {0.0, t1, 10};
  return g;
}

/// Running worst value against a bound, with a label for the worst case.
class Measure {
 public:
  Measure(std::string what, double bound, bool below = true)
      : what_(std::move(what)), bound_(bound), below_(below), worst_(below ? 0.0 : INFINITY) {}

  void add(double v, const std::string& where) {
    const bool worse = below_ ? !(v <= worst_) : !(v >= worst_);
    if (worse || count_ == 0) {
      worst_ = v;
      where_ = where;
    }
    ++count_;
  }
  bool pass() const { return count_ > 0 && (below_ ? worst_ < bound_ : worst_ > bound_); }
  std::string str() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %s %.3g (%s %.0e, n=%zu%s%s)", what_.c_str(),
                  below_ ? "max" : "min", worst_, below_ ? "<" : ">", bound_, count_,
                  where_.empty() ? "" : ", worst ", where_.c_str());
    return buf;
  }

 private:
  std::string what_;
  double bound_;
  bool below_;
  double worst_;
  std::string where_;
  std::size_t count_ = 0;
};

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void add(const Measure& m) {
    pass = pass && m.pass();
    lines.push_back(m.str());
  }
  void fail(const std::string& why) {
    pass = false;
    lines.push_back(why);
  }
};

double drift_of(const FamilyInstance& fam, const SampleBox& b, double t_end, std::size_t n = 20) {
  const auto inits = sample_states(fam.invariant_guard(), b, n, kDefaultSeed);
  return drift_check(fam, inits, t_end, tolerance(1e-10), 1e-6).max_drift;
}

Outcome forced_oscillator_family() {
  Outcome out;
  Measure drift("drift", 1e-6), residual("residual", 1e-8);
  struct Rho {
    const char* name;
    TimeFunction fn;
    double t1;
  };
  const Rho rhos[] = {{"1", kOne, 5}, {"cos t", kCos, 1}, {"2+cos t", kTwoPlusCos, 5}};
  const std::pair<const char*, TimeFunction> forces[] = {
      {"0", kZero}, {"t", TimeFunction::polynomial({0, 1})}, {"t^2", TimeFunction::polynomial({0, 0, 1})}};
  for (const auto& rho : rhos) {
    for (const auto& [fname, F] : forces) {
      const std::string where = std::string("rho=") + rho.name + " F=" + fname;
      const auto fam = forced_oscillator(rho.fn, F, window(0, rho.t1));
      drift.add(drift_of(fam, box(-1, 1, -1, 1), rho.t1), where);
      residual.add(residual_scan(fam, grid_on(rho.t1), 1e-8).max_abs, where);
    }
  }
  out.add(drift);
  out.add(residual);
  return out;
}

ReductionReport riccati_along(const FamilyInstance& fam, const PhaseState& x0, double t_end,
                              double threshold) {
  const Guard stop = fam.reduction->f.guard();
  const auto tr = integrate(fam.potential, x0, t_end, tolerance(1e-10, true), {}, &stop);
  return riccati_consistency(fam, tr, threshold);
}

Outcome sarlet_family() {
  Outcome out;
  Measure drift("drift", 1e-6), riccati("riccati residual", 1e-5),
      printed("printed-form riccati residual", 1e-2, false);
  struct Case {
    const char* name;
    TimeFunction rho, sigma, gamma;
  };
  const Case cases[] = {
      {"rho=2+cos t sigma=0.5 sin t gamma=0.3+0.1t", kTwoPlusCos,
       TimeFunction::trigonometric(0, 0.5, 1, -std::numbers::pi / 2), TimeFunction::polynomial({0.3, 0.1})},
      {"rho=2+cos t sigma=0 gamma=0", kTwoPlusCos, kZero, kZero},
      {"rho=1+0.1t^2 sigma=1 gamma=0.5", kSlowGrowth, kOne, TimeFunction::constant(0.5)}};
  const std::vector<PhaseState> starts{{2, 1, 0}, {2.5, 0.5, 0}, {3, 1.5, 0}};
  for (const auto& c : cases) {
    const auto fam = sarlet(c.rho, c.sigma, c.gamma, window(0, 3));
    drift.add(drift_of(fam, box(1.5, 3, 0.5, 2), 3.0), c.name);
    for (const auto& x0 : starts) {
      PhaseState s = x0;
      s.q += c.sigma(0.0);
      const auto r = riccati_along(fam, s, 3.0, 1e-5);
      if (r.points.empty()) out.fail(std::string("no riccati points for ") + c.name);
      riccati.add(r.max_residual, c.name);
    }
  }
  const auto bad = sarlet(kTwoPlusCos, kOne, kZero, window(0, 3), SarletForm::printed);
  printed.add(riccati_along(bad, {2.5, 0.5, 0}, 3.0, 1e-5).max_residual, "sigma=1 rho=2+cos t");
  out.add(drift);
  out.add(riccati);
  out.add(printed);
  return out;
}

Outcome quadratic_family() {
  Outcome out;
  Measure energy("energy drift", 1e-8), drift("drift", 1e-6), transform("transform error", 1e-12);
  const auto quartic = SpaceProfile::polynomial({0, 0, 0, 0, 1});
  energy.add(drift_of(quadratic(kOne, kZero, quartic), box(-1, 1, -1, 1), 5.0), "rho=1 sigma=0");
  drift.add(drift_of(quadratic(kTwoPlusCos, kSin, quartic), box(-1, 1, -1, 1), 5.0),
            "rho=2+cos t sigma=sin t U=x^4");

  const auto states = sample_states(Guard{}, {{-3, 3, 1}, {-3, 3, 1}, {0, 5, 1}}, 1000);
  for (const auto& x : states) {
    const auto y = to_transformed(kTwoPlusCos, kSin, x);
    const double r = kTwoPlusCos(x.t), rd = kTwoPlusCos.eval(x.t, 1);
    const double s = kSin(x.t), sd = kSin.eval(x.t, 1);
    transform.add(std::abs(y.q_bar - (x.q - s) / r), "q_bar");
    transform.add(std::abs(y.p_bar - (r * (x.p - sd) - rd * (x.q - s))), "p_bar");
    const PhaseState back = from_transformed(kTwoPlusCos, kSin, y, x.t);
    transform.add(std::max(std::abs(back.q - x.q), std::abs(back.p - x.p)), "inverse map");
  }
  out.add(energy);
  out.add(drift);
  out.add(transform);
  return out;
}

Outcome giacomini_family() {
  Outcome out;
  Measure drift("drift", 1e-6), implicit("implicit residual", 1e-10), shift("galilean shift", 1e-12);
  const std::pair<const char*, SpaceProfile> profiles[] = {
      {"W=x^2", SpaceProfile::polynomial({0, 0, 1})},
      {"W=0.5 exp(0.5x)", SpaceProfile::exponential(0.5, 0.5)}};
  for (double c : {1.0, -0.5}) {
    for (const auto& [wname, W] : profiles) {
      const auto fam = giacomini(SpaceProfile::constant(c), W, window(0, 3));
      drift.add(drift_of(fam, box(-1, 1, -1, 1), 3.0), std::string(wname) + " c=" + std::to_string(c));
      const auto still = giacomini(SpaceProfile::constant(0), W, window(0, 3));
      for (const auto& x : sample_states(Guard{}, {{-3, 3, 1}, {-3, 3, 1}, {0, 3, 1}}, 200)) {
        const double Ic = fam.invariant->value(x);
        const double I0 = still.invariant->value({x.q - c * x.t, x.p - c, x.t});
        shift.add(std::abs(Ic - I0) / std::max(1.0, std::abs(Ic)), wname);
      }
    }
  }
  const std::pair<const char*, SpaceProfile> speeds[] = {
      {"C2=V", SpaceProfile::polynomial({0, 1})}, {"C2=1+0.3V", SpaceProfile::polynomial({1, 0.3})}};
  for (const auto& [cname, c2] : speeds) {
    for (const auto& [wname, W] : profiles) {
      const auto fam = giacomini(c2, W, window(0, 2));
      const auto& res = fam.aux.at("implicit_residual");
      std::size_t evaluated = 0;
      const GridSpec grid = grid_on(2.0);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const PhaseState x = grid.state(i);
        try {
          implicit.add(std::abs(res(x)), std::string(cname) + " " + wname);
          ++evaluated;
        } catch (const DomainError&) {
        }
      }
      if (evaluated == 0) out.fail(std::string("no implicit points for ") + cname + " " + wname);
    }
  }
  out.add(drift);
  out.add(implicit);
  out.add(shift);
  return out;
}

Outcome abel_family_checks() {
  Outcome out;
  Measure residual("residual", 1e-6), slope("slope error", 1e-6), root("Q root disagreement", 1e-10);
  const std::pair<const char*, TimeFunction> rhos[] = {
      {"1", kOne}, {"1+0.1t^2", kSlowGrowth}, {"2+cos t", kTwoPlusCos}};
  const std::pair<const char*, SpaceProfile> Us[] = {
      {"0", SpaceProfile::constant(0)}, {"x^2/2", SpaceProfile::polynomial({0, 0, 0.5})}};
  const std::vector<double> starts{-3, -2, -1.5, 1.5, 2, 3};
  for (const auto& [rname, rho] : rhos) {
    for (double k : {1.0, -3.0}) {
      for (const auto& [uname, U] : Us) {
        const std::string where =
            std::string("rho=") + rname + " k=" + std::to_string(static_cast<int>(k)) + " U=" + uname;
        const auto fam = abel_family(rho, k, U, window(0, 2));
        residual.add(residual_scan(fam, grid_on(2.0), 1e-6).max_abs, where);
        for (double t : {0.3, 1.2}) {
          const auto r = abel_characteristic_check(fam, t, -1, 1, 1e-6, starts);
          if (r.points.empty()) out.fail("no slope points for " + where);
          slope.add(r.max_error, where);
        }
      }
      const auto fam = abel_family(rho, k, SpaceProfile::constant(0), window(0, 2));
      const auto F = SpaceProfile::polynomial({0, 1 / k});
      for (const auto& x : sample_states(Guard{}, {{-3, 3, 1}, {0, 0, 1}, {0, 2, 1}}, 100)) {
        const double closed = fam.aux.at("Q")(x);
        root.add(std::abs(solve_Q(F, rho, kZero, x.q, x.t) - closed) / std::max(1.0, std::abs(closed)),
                 std::string("rho=") + rname);
      }
    }
  }
  out.add(residual);
  out.add(slope);
  out.add(root);
  return out;
}

Outcome inverse_theorem() {
  Outcome out;
  Measure residual("residual", 1e-8), tangency("v(I)", 1e-8);
  struct Case {
    std::string name;
    FamilyInstance fam;
    SampleBox b;
  };
  const std::vector<Case> cases{
      {"forced_oscillator", forced_oscillator(kTwoPlusCos, TimeFunction::polynomial({0, 0, 1})),
       {{-2, 2, 1}, {-2, 2, 1}, {0, 5, 1}}},
      {"forced_oscillator cos", forced_oscillator(kCos, kZero, window(0, 1)),
       {{-2, 2, 1}, {-2, 2, 1}, {0, 1, 1}}},
      {"sarlet", sarlet(kTwoPlusCos, TimeFunction::trigonometric(0, 0.5, 1, -std::numbers::pi / 2),
                        TimeFunction::polynomial({0.3, 0.1}), window(0, 3)),
       {{1, 3, 1}, {-2, 2, 1}, {0, 3, 1}}},
      {"quadratic", quadratic(kTwoPlusCos, kSin, SpaceProfile::polynomial({0, 0, 0, 0, 1})),
       {{-2, 2, 1}, {-2, 2, 1}, {0, 5, 1}}},
      {"giacomini", giacomini(SpaceProfile::constant(1), SpaceProfile::polynomial({0, 0, 1}), window(0, 3)),
       {{-2, 2, 1}, {-2, 2, 1}, {0, 3, 1}}},
      {"V=q^2/2", autonomous(SpaceProfile::polynomial({0, 0, 0.5})), {{-2, 2, 1}, {-2, 2, 1}, {0, 1, 1}}},
      {"V=q^4/4", autonomous(SpaceProfile::polynomial({0, 0, 0, 0, 0.25})),
       {{-2, 2, 1}, {-2, 2, 1}, {0, 1, 1}}}};
  for (const auto& c : cases) {
    Guard g = c.fam.invariant_guard();
    const ScalarField& I = *c.fam.invariant;
    g.exclude_near("I_p", [&I](const PhaseState& x) { return I.d_p(x); }, kDefaultMomentumGuard);
    const auto samples = sample_states(g, c.b, 1000);
    const auto r = inverse_roundtrip(c.fam.potential, I, samples, 1e-8);
    if (r.included != 1000) out.fail(c.name + ": only " + std::to_string(r.included) + " samples");
    residual.add(r.max_residual, c.name);
    tangency.add(r.max_tangency, c.name);
  }
  out.add(residual);
  out.add(tangency);
  return out;
}

Outcome numerics_floor() {
  Outcome out;
  Measure period("period return", 1e-7), agreement("quadrature vs co-integration", 1e-8);
  const auto V = PotentialSpec::analytic([](auto q, auto) { return 0.5 * q * q; });
  const auto tr = integrate(V, {1, 0, 0}, 2 * std::numbers::pi, tolerance(1e-10));
  period.add(std::hypot(tr.back().q - 1.0, tr.back().p), "harmonic");

  const std::vector<FamilyInstance> fams{
      sarlet(kTwoPlusCos, kZero, kOne, window(0, 5)),
      sarlet(kSlowGrowth, kZero, kOne, window(0, 5)),
      abel_family(kTwoPlusCos, 1.0, SpaceProfile::polynomial({0, 0, 0.5}), window(0, 5)),
      abel_family(kSlowGrowth, -3.0, SpaceProfile::constant(0), window(0, 2)),
      abel_family(kOne, 1.0, SpaceProfile::constant(0), window(0, 5))};
  for (const auto& fam : fams) {
    const PhaseState x0{2, 1, 0};
    const auto traj = integrate(fam.potential, x0, fam.window.t1, tolerance(1e-10),
                                fam.aux_odes(x0.t));
    agreement.add(aux_agreement(fam, traj, 1e-8).max_abs, fam.label);
  }
  out.add(period);
  out.add(agreement);
  return out;
}

#ifdef FROBENIUS_HAVE_CLI
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  Outcome out;
  const fs::path root = fs::temp_directory_path() / "frobenius-acceptance";
  std::size_t compared = 0;
  for (const char* name : {"forced_oscillator", "sarlet", "quadratic", "giacomini", "abel",
                           "inverse_quartic", "sarlet_printed"}) {
    const fs::path config = fs::path(FROBENIUS_SCENARIO_DIR) / (std::string(name) + ".yaml");
    std::ostringstream sink;
    cli::RunOptions opts;
    opts.out_stream = &sink;
    opts.err_stream = &sink;
    opts.threads = 2;
    int codes[2];
    for (int run = 0; run < 2; ++run) {
      opts.out = root / name / std::to_string(run);
      fs::remove_all(*opts.out);
      codes[run] = cli::cmd_verify(config, opts);
    }
    if (codes[0] != codes[1] || codes[0] == cli::kExitConfig) {
      out.fail(std::string(name) + ": exit codes " + std::to_string(codes[0]) + "/" + std::to_string(codes[1]));
    }
    for (const auto& entry : fs::directory_iterator(root / name / "0")) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      if (slurp(entry.path()) != slurp(root / name / "1" / entry.path().filename())) {
        out.fail(std::string(name) + "/" + entry.path().filename().string() + " differs");
      }
    }
  }
  fs::remove_all(root);
  out.lines.push_back(std::to_string(compared) + " CSV files byte-identical across repeated runs");
  if (compared == 0) out.fail("no CSV files compared");
  return out;
}
#else
Outcome determinism() {
  Outcome out;
  out.fail("command-line tool not built");
  return out;
}
#endif

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "forced oscillator family", forced_oscillator_family},
      {2, "Sarlet family", sarlet_family},
      {3, "quadratic family", quadratic_family},
      {4, "Giacomini family", giacomini_family},
      {5, "Abel family", abel_family_checks},
      {6, "inverse theorem", inverse_theorem},
      {7, "numerics floor", numerics_floor},
      {8, "determinism", determinism},
  };
  bool all = true;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::printf("criterion %d %s: %s\n", c.id, c.title, o.pass ? "PASS" : "FAIL");
    for (const auto& line : o.lines) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
