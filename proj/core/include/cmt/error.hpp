#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmt {

enum class ErrorCode {
  MalformedJump,
  UnknownVertex,
  CyclicComponent,
  EmptyWindow,
  BadDimension,
  BadGraph,
  DetailedBalanceViolated,
  TooLarge,
  NotConnected,
  BudgetExhausted,
  BadPath,
  Unconditionable,
  Empty,
  NeedsTorus,
  InvalidArgument,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures surface as this exception; `code()` is the stable part.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace cmt
