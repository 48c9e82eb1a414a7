#pragma once

#include <stdexcept>
#include <string>

namespace taxicbf {

enum class ErrorKind {
  kValidation,
  kOutOfRange,
  kUnreachable,
  kInfeasibleFillet,
  kQpInfeasible,
  kIo,
  kNumeric,
};

// Base error for everything the library throws. The C layer maps `kind()` onto
// its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

class OutOfRangeError : public Error {
 public:
  explicit OutOfRangeError(const std::string& message)
      : Error(ErrorKind::kOutOfRange, message) {}
};

class UnreachableError : public Error {
 public:
  explicit UnreachableError(const std::string& message)
      : Error(ErrorKind::kUnreachable, message) {}
};

class InfeasibleFilletError : public Error {
 public:
  InfeasibleFilletError(const std::string& corner, const std::string& message)
      : Error(ErrorKind::kInfeasibleFillet, message), corner_(corner) {}

  const std::string& corner() const noexcept { return corner_; }

 private:
  std::string corner_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::kIo, message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorKind::kNumeric, message) {}
};

}  // namespace taxicbf
