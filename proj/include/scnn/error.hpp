#pragma once

#include <stdexcept>
#include <string>

namespace scnn {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration, incompatible layer composition, invalid flags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor shape mismatches and degenerate inputs.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed corpus records, unknown labels, unusable datasets.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed binary files (embeddings, checkpoints).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Non-finite losses and other numeric breakdowns.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace scnn
