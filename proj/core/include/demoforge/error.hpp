#pragma once

#include <stdexcept>
#include <string>

namespace demoforge {

enum class ErrorKind {
  InvalidSpec,
  Shape,
  EmptyBatch,
  InvalidConfig,
  Training,
  Generation,
  Io,
  Format,
};

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidSpecError : public Error {
 public:
  explicit InvalidSpecError(const std::string& what) : Error(ErrorKind::InvalidSpec, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::Shape, what) {}
};

class EmptyBatchError : public Error {
 public:
  explicit EmptyBatchError(const std::string& what) : Error(ErrorKind::EmptyBatch, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::InvalidConfig, what) {}
};

/// Raised when a loss turns non-finite. Carries the epoch it happened in.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch)
      : Error(ErrorKind::Training, what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& what) : Error(ErrorKind::Generation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::Format, what) {}
};

}  // namespace demoforge
