#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sembed {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shape / dimension mismatches.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// API misuse: backward on a non-scalar, reusing a consumed tape, mixing tapes.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Bad argument values: ids out of range, empty datasets, scores out of range.
class InputError : public Error {
 public:
  using Error::Error;
};

// Numeric domain violations: zero-norm vectors, undefined correlations.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration; the message lists every violation found.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File parsing failure carrying a 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class CheckpointFault { BadMagic, BadVersion, Truncated, Corrupt };

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointFault fault, const std::string& what)
      : Error(what), fault_(fault) {}
  CheckpointFault fault() const { return fault_; }

 private:
  CheckpointFault fault_;
};

}  // namespace sembed
