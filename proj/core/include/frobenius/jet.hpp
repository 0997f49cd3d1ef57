#pragma once

// Forward-mode automatic differentiation over the three phase-space
// coordinates (q, p, t). Jets nest: Jet<Jet<double>> carries second
// derivatives, Jet<Jet<Jet<double>>> third, and so on.

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

namespace frobenius {

inline constexpr std::size_t kSlotQ = 0;
inline constexpr std::size_t kSlotP = 1;
inline constexpr std::size_t kSlotT = 2;

template <class T>
struct Jet {
  using value_type = T;

  T v{};
  std::array<T, 3> d{};

  constexpr Jet() = default;
  constexpr Jet(double x) : v(x) {}  // NOLINT: constants mix freely
  explicit constexpr Jet(const T& x)
    requires(!std::is_same_v<T, double>)
      : v(x) {}
  constexpr Jet(const T& x, const std::array<T, 3>& grad) : v(x), d(grad) {}

  /// x seeded as the independent variable occupying `slot`.
  static constexpr Jet variable(const T& x, std::size_t slot) {
    Jet j(x, {});
    j.d[slot] = T(1.0);
    return j;
  }

  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }
};

using Jet1 = Jet<double>;
using Jet2 = Jet<Jet1>;

template <class T>
struct is_jet : std::false_type {};
template <class T>
struct is_jet<Jet<T>> : std::true_type {};
template <class T>
inline constexpr bool is_jet_v = is_jet<T>::value;

inline double value_of(double x) { return x; }
template <class T>
double value_of(const Jet<T>& x) {
  return value_of(x.v);
}

/// Jet whose value is f and whose gradient is df * x.d (one-argument chain rule).
template <class T>
Jet<T> chain(const Jet<T>& x, const T& f, const T& df) {
  Jet<T> r(f, {});
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = df * x.d[i];
  return r;
}

/// Two-argument chain rule: value f, partials f_a and f_b.
template <class T>
Jet<T> chain(const Jet<T>& a, const Jet<T>& b, const T& f, const T& fa, const T& fb) {
  Jet<T> r(f, {});
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = fa * a.d[i] + fb * b.d[i];
  return r;
}

template <class T>
Jet<T> operator+(const Jet<T>& a, const Jet<T>& b) {
  Jet<T> r(a.v + b.v, {});
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
template <class T>
Jet<T> operator-(const Jet<T>& a, const Jet<T>& b) {
  Jet<T> r(a.v - b.v, {});
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
template <class T>
Jet<T> operator-(const Jet<T>& a) {
  Jet<T> r(-a.v, {});
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = -a.d[i];
  return r;
}
template <class T>
Jet<T> operator+(const Jet<T>& a) {
  return a;
}
template <class T>
Jet<T> operator*(const Jet<T>& a, const Jet<T>& b) {
  Jet<T> r(a.v * b.v, {});
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
template <class T>
Jet<T> operator/(const Jet<T>& a, const Jet<T>& b) {
  const T inv = T(1.0) / b.v;
  const T q = a.v * inv;
  Jet<T> r(q, {});
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = (a.d[i] - q * b.d[i]) * inv;
  return r;
}

template <class T>
Jet<T> operator+(const Jet<T>& a, double b) {
  Jet<T> r = a;
  r.v = r.v + b;
  return r;
}
template <class T>
Jet<T> operator+(double a, const Jet<T>& b) {
  return b + a;
}
template <class T>
Jet<T> operator-(const Jet<T>& a, double b) {
  Jet<T> r = a;
  r.v = r.v - b;
  return r;
}
template <class T>
Jet<T> operator-(double a, const Jet<T>& b) {
  return -b + a;
}
template <class T>
Jet<T> operator*(const Jet<T>& a, double b) {
  Jet<T> r(a.v * b, {});
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = a.d[i] * b;
  return r;
}
template <class T>
Jet<T> operator*(double a, const Jet<T>& b) {
  return b * a;
}
template <class T>
Jet<T> operator/(const Jet<T>& a, double b) {
  return a * (1.0 / b);
}
template <class T>
Jet<T> operator/(double a, const Jet<T>& b) {
  const T inv = T(1.0) / b.v;
  const T q = a * inv;
  Jet<T> r(q, {});
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = -q * b.d[i] * inv;
  return r;
}

template <class T>
Jet<T> sin(const Jet<T>& x) {
  using std::cos;
  using std::sin;
  return chain(x, T(sin(x.v)), T(cos(x.v)));
}
template <class T>
Jet<T> cos(const Jet<T>& x) {
  using std::cos;
  using std::sin;
  return chain(x, T(cos(x.v)), T(-sin(x.v)));
}
template <class T>
Jet<T> exp(const Jet<T>& x) {
  using std::exp;
  const T e = exp(x.v);
  return chain(x, e, e);
}
template <class T>
Jet<T> log(const Jet<T>& x) {
  using std::log;
  return chain(x, T(log(x.v)), T(1.0 / x.v));
}
template <class T>
Jet<T> sqrt(const Jet<T>& x) {
  using std::sqrt;
  const T s = sqrt(x.v);
  return chain(x, s, T(0.5 / s));
}

/// Square without relying on pow overloads for jets.
template <class S>
S sq(const S& x) {
  return x * x;
}

}  // namespace frobenius
