#pragma once

#include <stdexcept>
#include <string>

namespace fairbound {

// Base class for all recoverable data/validation errors. The CLI maps these
// to exit code 2 and NumericalFailure to exit code 3.
class FairboundError : public std::runtime_error {
 public:
  explicit FairboundError(const std::string& msg) : std::runtime_error(msg) {}
};

// A conditioning set (sensitive group, target class, or (s,y) cell) is empty.
class EmptyGroup : public FairboundError {
 public:
  explicit EmptyGroup(const std::string& msg) : FairboundError(msg) {}
};

// Ill-formed input data; carries the offending row (0-based, -1 if unknown).
class MalformedData : public FairboundError {
 public:
  MalformedData(const std::string& msg, long row = -1)
      : FairboundError(row >= 0 ? msg + " (row " + std::to_string(row) + ")"
                                : msg),
        row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

class DimensionTooHigh : public FairboundError {
 public:
  explicit DimensionTooHigh(const std::string& msg) : FairboundError(msg) {}
};

class TooFewSamples : public FairboundError {
 public:
  explicit TooFewSamples(const std::string& msg) : FairboundError(msg) {}
};

// Solver-side failure (stalled pivoting, out-of-range optimum, ...).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace fairbound
