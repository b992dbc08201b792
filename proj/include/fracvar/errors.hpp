#pragma once

#include <stdexcept>
#include <string>

namespace fracvar {

// Base of the library's exception family.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller passed an argument outside the documented domain.
struct InvalidParameter : Error {
  using Error::Error;
};

// Inputs were legal but the computation could not complete.
struct NumericalFailure : Error {
  using Error::Error;
};

struct ParameterOutOfRange : InvalidParameter {
  using InvalidParameter::InvalidParameter;
};

struct DomainError : InvalidParameter {
  using InvalidParameter::InvalidParameter;
};

struct IndexError : InvalidParameter {
  using InvalidParameter::InvalidParameter;
};

struct GridMismatch : InvalidParameter {
  using InvalidParameter::InvalidParameter;
};

struct OutOfRange : InvalidParameter {
  using InvalidParameter::InvalidParameter;
};

struct HypothesesIndistinguishable : InvalidParameter {
  using InvalidParameter::InvalidParameter;
};

struct NotPositiveDefinite : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

struct DivergentJump : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

struct EmbeddingNotNonnegative : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

}  // namespace fracvar
