#pragma once

// Independent oracles for the unit tests: plain central differences and a
// seeded generator, kept apart from the library's own finite-difference paths.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "frobenius/types.hpp"

namespace frobenius::test {

inline double central(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  PhaseState state(double qlo, double qhi, double plo, double phi, double tlo, double thi) {
    const double q = uniform(qlo, qhi);
    const double p = uniform(plo, phi);
    return {q, p, uniform(tlo, thi)};
  }

 private:
  std::mt19937_64 gen_;
};

/// u(s) = s_t + p s_q - V_q s_p with every partial taken by central differences.
inline double fd_apply_u(const std::function<double(double, double)>& V,
                         const std::function<double(const PhaseState&)>& s, const PhaseState& x,
                         double h = 1e-5) {
  const double s_q = (s({x.q + h, x.p, x.t}) - s({x.q - h, x.p, x.t})) / (2 * h);
  const double s_p = (s({x.q, x.p + h, x.t}) - s({x.q, x.p - h, x.t})) / (2 * h);
  const double s_t = (s({x.q, x.p, x.t + h}) - s({x.q, x.p, x.t - h})) / (2 * h);
  const double V_q = (V(x.q + h, x.t) - V(x.q - h, x.t)) / (2 * h);
  return s_t + x.p * s_q - V_q * s_p;
}

}  // namespace frobenius::test
