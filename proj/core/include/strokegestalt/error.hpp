#pragma once

#include <stdexcept>
#include <string>

namespace strokegestalt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stroke table parsing or label encoding failure.
class CodecError : public Error {
 public:
  using Error::Error;
};

/// Dataset, manifest or image I/O failure.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Tensor or image shape precondition violated.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Raised when a training loss becomes non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace strokegestalt
