#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gradekit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document; carries the 1-based line/column when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Dangling references, duplicate ids, rubric sum mismatches.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel hit its iteration cap. Always a bug, never data.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Template body or bindings do not fit the placeholder contract.
class TemplateError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace gradekit
