#include "cmt/random.hpp"

#include "cmt/error.hpp"

namespace cmt {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedJump: return "MalformedJump";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::CyclicComponent: return "CyclicComponent";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::BadGraph: return "BadGraph";
    case ErrorCode::DetailedBalanceViolated: return "DetailedBalanceViolated";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::BadPath: return "BadPath";
    case ErrorCode::Unconditionable: return "Unconditionable";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::NeedsTorus: return "NeedsTorus";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::uint64_t key_seed(std::uint64_t seed, std::span<const std::int64_t> key) noexcept {
  std::uint64_t h = mix64(seed ^ 0xcbf29ce484222325ULL);
  for (const std::int64_t k : key) {
    h = mix64(h ^ static_cast<std::uint64_t>(k));
  }
  return mix64(h + key.size());
}

}  // namespace cmt
