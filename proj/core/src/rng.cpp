#include "ctree/rng.hpp"

#include "ctree/error.hpp"

namespace ctree {

Rng Rng::stream(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x63747265u};
  Rng r;
  r.engine_.seed(seq);
  return r;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidTree: return "InvalidTree";
    case ErrorCode::MissingRoot: return "MissingRoot";
    case ErrorCode::MissingParent: return "MissingParent";
    case ErrorCode::GapInChildren: return "GapInChildren";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::InconsistentInput: return "InconsistentInput";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::InvalidLaw: return "InvalidLaw";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::RejectionBudget: return "RejectionBudget";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonBinarySkeleton: return "NonBinarySkeleton";
    case ErrorCode::MemoryBudget: return "MemoryBudget";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace ctree
