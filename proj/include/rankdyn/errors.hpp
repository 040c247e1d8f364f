#pragma once

#include <stdexcept>
#include <string>

namespace rankdyn {

// Base class of every error the library throws. The CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

/// Not enough observations near a point to form a local estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Evaluation time lies inside a boundary strip of width h_T.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// All-flat population: component magnitudes integrate to zero.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

}  // namespace rankdyn
