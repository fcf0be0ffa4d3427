#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reshom {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Lexical or syntactic error in an expression; carries the byte offset of
/// the first offending character.
class ParseError : public Error {
public:
  ParseError(std::size_t offset, const std::string& msg)
      : Error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// Non-finite value, out-of-range variable, or similar evaluation failure.
class EvalError : public Error {
public:
  using Error::Error;
};

/// Invalid user-facing configuration (bad parameter, incommensurate sizes).
/// Maps to CLI exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Iterative solver failed to reach its tolerance. Maps to CLI exit code 3.
class SolveError : public Error {
public:
  using Error::Error;
};

/// Parameter selection violates the convergence theorem's hypothesis
/// T < 2 c2 |R-L|^2 / d. Maps to CLI exit code 4.
class HypothesisError : public Error {
public:
  using Error::Error;
};

}  // namespace reshom
