#pragma once

#include <stdexcept>
#include <string>

namespace qnm {

// Malformed input files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model or argument violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative method failed (Newton, root tracking, contour too close to a zero).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Winding-number contour passes too close to a zero of W.
class ContourTooCloseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Gram matrix of a dual-basis construction is numerically singular.
class SingularMetricError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Perturbation has a vanishing splitting element; the generic formulas do not apply.
class NonGenericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An internal consistency check failed (e.g. Taylor data inconsistent with a multiplicity).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qnm
