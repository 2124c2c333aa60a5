#pragma once

#include <stdexcept>
#include <string>

namespace rgbt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs whose dimensions disagree (maps, images, trajectories).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient fits, collapsed boxes, projections to infinity.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its documented domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unknown configuration key/value. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Missing files, malformed manifests, bad ground truth. Exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

/// API used in the wrong order (backward before forward, step before init).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace rgbt
