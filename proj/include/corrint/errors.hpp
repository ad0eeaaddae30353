#pragma once

#include <stdexcept>
#include <string>

namespace corrint {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a pointwise function.
struct DomainError : Error {
  using Error::Error;
};

// Parameters that violate an invariant or an operation's hypothesis.
struct PreconditionError : Error {
  using Error::Error;
};

// Requested point lies outside the region where an expansion is valid.
struct OutOfValidity : Error {
  using Error::Error;
};

// A derivative required by a formula does not exist at the point.
struct DerivativeUndefined : Error {
  using Error::Error;
};

struct QuadratureFailure : Error {
  QuadratureFailure(const std::string& what, double estimate, double error)
      : Error(what), estimate(estimate), error(error) {}
  double estimate;
  double error;
};

struct DegenerateSample : Error {
  using Error::Error;
};

struct SingularKernel : Error {
  using Error::Error;
};

struct MatrixTooLarge : Error {
  using Error::Error;
};

struct NonFiniteSample : Error {
  using Error::Error;
};

}  // namespace corrint
