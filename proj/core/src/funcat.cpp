#include "frobenius/funcat.hpp"

#include <algorithm>
#include <limits>

namespace frobenius {

std::string_view to_string(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::constant: return "constant";
    case FunctionKind::polynomial: return "polynomial";
    case FunctionKind::trigonometric: return "trigonometric";
    case FunctionKind::exponential: return "exponential";
  }
  return "unknown";
}

FunctionKind parse_function_kind(std::string_view name) {
  if (name == "constant") return FunctionKind::constant;
  if (name == "polynomial") return FunctionKind::polynomial;
  if (name == "trigonometric") return FunctionKind::trigonometric;
  if (name == "exponential") return FunctionKind::exponential;
  throw ContractError("unknown function kind '" + std::string(name) +
                      "' (expected constant, polynomial, trigonometric or exponential)");
}

namespace detail {

CatalogFunction::CatalogFunction(FunctionKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {
  std::size_t expected = 0;
  switch (kind_) {
    case FunctionKind::constant: expected = 1; break;
    case FunctionKind::trigonometric: expected = 4; break;
    case FunctionKind::exponential: expected = 2; break;
    case FunctionKind::polynomial:
      if (params_.empty()) throw ContractError("polynomial needs at least one coefficient");
      expected = params_.size();
      break;
  }
  if (params_.size() != expected) {
    throw ContractError(std::string(to_string(kind_)) + " expects " + std::to_string(expected) +
                        " parameters, got " + std::to_string(params_.size()));
  }
  for (double v : params_) {
    if (!std::isfinite(v)) throw ContractError("catalog parameters must be finite");
  }
}

bool CatalogFunction::is_constant() const {
  switch (kind_) {
    case FunctionKind::constant: return true;
    case FunctionKind::polynomial:
      return std::all_of(params_.begin() + 1, params_.end(), [](double c) { return c == 0.0; });
    case FunctionKind::trigonometric: return params_[1] == 0.0 || params_[2] == 0.0;
    case FunctionKind::exponential: return params_[0] == 0.0 || params_[1] == 0.0;
  }
  return false;
}

}  // namespace detail

double min_abs_on_window(const TimeFunction& fn, TimeWindow window, std::size_t samples) {
  if (samples < 2) samples = 2;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = window.t0 + window.length() * static_cast<double>(i) /
                                     static_cast<double>(samples - 1);
    lowest = std::min(lowest, std::abs(fn(t)));
  }
  return lowest;
}

void require_nonzero(const TimeFunction& fn, TimeWindow window, std::string_view what,
                     double delta, std::size_t samples) {
  const double lowest = min_abs_on_window(fn, window, samples);
  if (!(lowest >= delta)) {
    throw ConstructionError(std::string(what) + " comes within " + std::to_string(lowest) +
                            " of zero on [" + std::to_string(window.t0) + ", " +
                            std::to_string(window.t1) + "]");
  }
}

}  // namespace frobenius
