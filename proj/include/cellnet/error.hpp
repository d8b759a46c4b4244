#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cellnet {

enum class ErrorKind {
  kInvalidInput,
  kCapacityExceeded,
  kNumericFailure,
  kInternalError,
  kTheoremViolation,
  kParseError,
  kEvalError,
};

const char* to_string(ErrorKind kind);

/// Base exception for every library failure. The kind selects the CLI exit
/// code (see tools/cli.cpp).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class CapacityExceeded : public Error {
 public:
  CapacityExceeded(const std::string& what, std::size_t partial_size)
      : Error(ErrorKind::kCapacityExceeded, what), partial_size_(partial_size) {}

  std::size_t partial_size() const noexcept { return partial_size_; }

 private:
  std::size_t partial_size_;
};

/// Half-open byte range into the source text of an expression.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, SourceSpan span)
      : Error(ErrorKind::kParseError, what), span_(span) {}

  SourceSpan span() const noexcept { return span_; }

 private:
  SourceSpan span_;
};

class EvalError : public Error {
 public:
  EvalError(const std::string& what, SourceSpan span)
      : Error(ErrorKind::kEvalError, what), span_(span) {}

  SourceSpan span() const noexcept { return span_; }

 private:
  SourceSpan span_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorKind::kInvalidInput, what);
}

}  // namespace cellnet
