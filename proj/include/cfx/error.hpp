#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cfx {

enum class ErrorCode {
  DomainTooSmall,
  TooFewClasses,
  DuplicateIdentifier,
  UnknownIdentifier,
  TheoryMismatch,
  NotSurjective,
  IncompleteTable,
  NotBoolean,
  UnknownClass,
  NotAPreorder,
  BackendFailure,
  ExternalExplainerFailure,
  InvalidArgument,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// Base error for every invariant violation raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed textual input. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace cfx
