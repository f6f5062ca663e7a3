#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedcorr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric or structural argument violates a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Dimensions of two operands do not agree.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Malformed external data (LIBSVM text, IDX binary, wire records).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg, std::size_t line = 0)
      : Error(line == 0 ? msg : msg + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// Fewer samples than a statistical operation needs.
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

// A message arrived in a state that cannot consume it.
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace fedcorr
