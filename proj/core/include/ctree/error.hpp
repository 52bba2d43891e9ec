#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctree {

enum class ErrorCode {
  InvalidTree,
  MissingRoot,
  MissingParent,
  GapInChildren,
  InvalidPath,
  InconsistentInput,
  TooLarge,
  Overflow,
  InvalidLaw,
  BudgetExceeded,
  Unsupported,
  RejectionBudget,
  EmptySample,
  OutOfRange,
  NonBinarySkeleton,
  MemoryBudget,
  NoConvergence,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ctree
