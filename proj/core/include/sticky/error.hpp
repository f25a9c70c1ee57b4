#pragma once

#include <stdexcept>
#include <string>

namespace sticky {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad shapes, nonpositive masses, unsorted positions, p < 1 and the like.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A power-law kernel was asked for its value at the origin.
class SingularEvaluation : public Error {
 public:
  using Error::Error;
};

/// Inverse of a bounded primitive requested outside its range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Block list that overlaps, is unordered, empty or out of range.
class MalformedPartition : public Error {
 public:
  using Error::Error;
};

/// The event-driven integrator could not make progress.
class NumericalAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace sticky
