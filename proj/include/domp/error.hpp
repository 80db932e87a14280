#pragma once

#include <stdexcept>
#include <string>

namespace domp {

enum class ErrorCode {
  ZeroColumn,
  Degenerate,
  EmptyList,
  DimensionMismatch,
  SingularGram,
  SupportTooLarge,
  FullSupport,
  InvalidArgument,
  ProtocolViolation,
  NoVotes,
  InsufficientMachines,
  MalformedFrame,
  MipViolated,
  EmptyResidualSupport,
  DegenerateDimension,
  Infeasible,
  HypothesisViolated,
  RhoBelowR,
  PatternMismatch,
  Config,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; the code identifies the failure
// class and the message carries the context (offending index, key, path).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace domp
