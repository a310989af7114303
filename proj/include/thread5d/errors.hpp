#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thread5d {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed expression source. `offset` is the byte position of the first
// token that could not be consumed; the message already embeds it.
struct ParseError : Error {
  ParseError(std::string msg, std::size_t at) : Error(std::move(msg)), offset(at) {}
  std::size_t offset;
};

// Structurally invalid configuration: bad JSON, schema violation, missing or
// unknown metric fields, inconsistent scenario blocks.
struct ConfigError : Error {
  using Error::Error;
};

// An expression was evaluated outside its domain (log of a non-positive
// value, division by zero, ...). Carries the offending subexpression text.
struct EvalDomainError : Error {
  EvalDomainError(std::string msg, std::string subexpr_, std::size_t at)
      : Error(std::move(msg)), subexpr(std::move(subexpr_)), offset(at) {}
  std::string subexpr;
  std::size_t offset;
};

// Numerical breakdown at a valid input: non-SPD spatial metric, singular
// 5x5 metric, adaptive step collapse, non-finite state.
struct NumericError : Error {
  using Error::Error;
};

} // namespace thread5d
