#pragma once

#include <stdexcept>
#include <string>

namespace ravnet {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor dimension mismatch or invalid shape.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (log of a
/// non-positive value, non-finite softmax input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An operation received an empty sequence where at least one element
/// is required.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Misuse of the gradient tape (loss not recorded, tensors mixed across
/// tapes, backward run twice).
class TapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (non-divisible channel counts, bad window
/// width, malformed config keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failure; the message names the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A file was readable but its contents violate the expected format;
/// the message carries the byte offset where parsing failed.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent runtime state (missing gradient, checkpoint/network
/// mismatch); the message names the offending entry.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss; the message records the epoch.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A function expected to be deterministic returned different values for
/// two identical evaluations.
class DeterminismError : public Error {
 public:
  using Error::Error;
};

}  // namespace ravnet
