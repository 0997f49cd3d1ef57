#pragma once

#include <stdexcept>
#include <string>

namespace frobenius {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (bad order, bad parameters).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A state lies outside the domain guard of a potential or field.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Characteristics of the implicit potential crossed; no single-valued root.
class ShockError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// reduce_general_field was asked to divide by B - A p = 0.
class SingularReductionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A family could not be built on the requested time window.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Root finding could not locate a sign change.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations or subdivisions.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The step size collapsed below floating-point resolution.
class StiffnessError : public Error {
 public:
  using Error::Error;
};

/// The integrator exceeded IntegratorConfig::max_steps.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Every point of a residual scan or sample set was guarded out.
class DegenerateScanError : public Error {
 public:
  using Error::Error;
};

/// The requested check does not apply to this family (e.g. no invariant).
class UnsupportedCheckError : public Error {
 public:
  using Error::Error;
};

}  // namespace frobenius
