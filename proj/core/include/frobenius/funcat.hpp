#pragma once

// Closed catalog of scalar functions of one variable with exact derivatives.
//
// Every family parameter (rho, sigma, gamma, the driving force, U, W, C2 and
// the shape function of the implicit Q relation) is one of four kinds:
//
//   constant       c
//   polynomial     a0 + a1 x + ... + an x^n
//   trigonometric  a + b cos(w x + phi)
//   exponential    a exp(lambda x)
//
// Evaluation is templated on the scalar type so that jets flow through the
// closed forms and pick up further derivatives exactly.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frobenius/errors.hpp"
#include "frobenius/jet.hpp"
#include "frobenius/types.hpp"

namespace frobenius {

enum class FunctionKind { constant, polynomial, trigonometric, exponential };

std::string_view to_string(FunctionKind kind);
/// Parses "constant", "polynomial", "trigonometric" or "exponential".
FunctionKind parse_function_kind(std::string_view name);

namespace detail {

class CatalogFunction {
 public:
  CatalogFunction(FunctionKind kind, std::vector<double> params);

  FunctionKind kind() const { return kind_; }
  std::span<const double> params() const { return params_; }

  /// True when every derivative of order >= 1 vanishes identically.
  bool is_constant() const;

  /// n-th derivative at x, any n >= 0.
  template <class S>
  S derivative(const S& x, int n) const {
    using std::cos;
    using std::exp;
    switch (kind_) {
      case FunctionKind::constant:
        return S(n == 0 ? params_[0] : 0.0);
      case FunctionKind::polynomial: {
        // Horner on the n-times differentiated coefficients.
        const auto deg = static_cast<int>(params_.size()) - 1;
        if (n > deg) return S(0.0);
        S acc(0.0);
        for (int i = deg; i >= n; --i) {
          double c = params_[static_cast<std::size_t>(i)];
          for (int j = 0; j < n; ++j) c *= static_cast<double>(i - j);
          acc = acc * x + c;
        }
        return acc;
      }
      case FunctionKind::trigonometric: {
        using std::sin;
        const double a = params_[0], b = params_[1], w = params_[2], phi = params_[3];
        const S arg = w * x + phi;
        const double scale = b * std::pow(w, n);
        switch (n % 4) {
          case 0: return n == 0 ? scale * cos(arg) + a : scale * cos(arg);
          case 1: return -scale * sin(arg);
          case 2: return -scale * cos(arg);
          default: return scale * sin(arg);
        }
      }
      case FunctionKind::exponential: {
        const double a = params_[0], lambda = params_[1];
        return a * std::pow(lambda, n) * exp(lambda * x);
      }
    }
    return S(0.0);
  }

 private:
  FunctionKind kind_;
  std::vector<double> params_;
};

}  // namespace detail

/// Catalog function whose public eval accepts derivative orders 0..MaxOrder.
template <int MaxOrder>
class CatalogFn {
 public:
  static CatalogFn constant(double c) { return CatalogFn(FunctionKind::constant, {c}); }
  static CatalogFn polynomial(std::vector<double> coeffs) {
    return CatalogFn(FunctionKind::polynomial, std::move(coeffs));
  }
  /// a + b cos(omega x + phi)
  static CatalogFn trigonometric(double a, double b, double omega, double phi) {
    return CatalogFn(FunctionKind::trigonometric, {a, b, omega, phi});
  }
  /// a exp(lambda x)
  static CatalogFn exponential(double a, double lambda) {
    return CatalogFn(FunctionKind::exponential, {a, lambda});
  }
  static CatalogFn make(FunctionKind kind, std::vector<double> params) {
    return CatalogFn(kind, std::move(params));
  }

  static constexpr int max_order() { return MaxOrder; }

  FunctionKind kind() const { return fn_.kind(); }
  std::span<const double> params() const { return fn_.params(); }
  bool is_constant() const { return fn_.is_constant(); }

  /// order-th derivative at x. Throws ContractError for order outside 0..MaxOrder.
  template <class S>
  S eval(const S& x, int order = 0) const {
    if (order < 0 || order > MaxOrder) {
      throw ContractError("catalog function derivative order " + std::to_string(order) +
                          " outside 0.." + std::to_string(MaxOrder));
    }
    return fn_.derivative(x, order);
  }
  template <class S>
  S operator()(const S& x) const {
    return fn_.derivative(x, 0);
  }

 private:
  CatalogFn(FunctionKind kind, std::vector<double> params) : fn_(kind, std::move(params)) {}

  detail::CatalogFunction fn_;
};

/// Function of time: rho, sigma, gamma, the driving force, V0.
using TimeFunction = CatalogFn<3>;
/// Function of a spatial-like argument: U, W, C2(V), the Q shape function.
using SpaceProfile = CatalogFn<2>;

inline constexpr double kDefaultRhoGuard = 1e-3;
inline constexpr std::size_t kGuardSamples = 1024;

/// Smallest |fn(t)| over `samples` uniform points of the window (endpoints included).
double min_abs_on_window(const TimeFunction& fn, TimeWindow window,
                         std::size_t samples = kGuardSamples);

/// Throws ConstructionError naming `what` when |fn| < delta somewhere on the window.
void require_nonzero(const TimeFunction& fn, TimeWindow window, std::string_view what,
                     double delta = kDefaultRhoGuard, std::size_t samples = kGuardSamples);

}  // namespace frobenius
