#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gapsafe {

/// Raised when arguments violate an operation's preconditions
/// (mismatched dimensions, out-of-range indices, invalid labels).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the EDPP step-length computation when the reference direction
/// y/lambda_prev - theta vanishes.
class EdppDegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input file could not be parsed. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gapsafe
