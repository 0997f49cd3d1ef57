#pragma once

#include <cmath>

namespace frobenius {

/// A point (q, p, t) of extended phase space.
struct PhaseState {
  double q = 0.0;
  double p = 0.0;
  double t = 0.0;

  bool finite() const { return std::isfinite(q) && std::isfinite(p) && std::isfinite(t); }
  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

/// Closed time interval a scenario lives on.
struct TimeWindow {
  double t0 = 0.0;
  double t1 = 1.0;

  bool contains(double t) const { return t >= t0 && t <= t1; }
  double length() const { return t1 - t0; }
};

}  // namespace frobenius
