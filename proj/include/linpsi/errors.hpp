#pragma once

#include <stdexcept>
#include <string>

#include "linpsi/types.hpp"

namespace linpsi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: index out of range, dimension mismatch, non-finite input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Instance with a zero gap (e.g. two identical mean rows), or one the
/// algorithms cannot make progress on.
class DegenerateInstance : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// A sampling budget below what the rounding guarantee needs.
class BudgetTooSmall : public Error {
 public:
  BudgetTooSmall(const std::string& what, Count minimal)
      : Error(what + " (minimal admissible budget: " + std::to_string(minimal) + ")"),
        minimal_(minimal) {}
  Count minimal_budget() const noexcept { return minimal_; }

 private:
  Count minimal_;
};

/// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Internal invariant broken (a bug, not a user error).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace linpsi
