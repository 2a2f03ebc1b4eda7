// Library-wide error type.  Every failure carries a stable code (mirrored in
// the public C header), the stage that raised it, and a human-readable message.
#pragma once

#include <stdexcept>
#include <string>

namespace nearsing {

enum class ErrorCode {
  InvalidArgument = 1,
  NonConvergence = 2,
  SingularSystem = 3,
  EmptySelection = 4,
  RootRefinementFailure = 5,
  OutOfRegion = 6,
  RelationViolated = 7,
  PositivityViolated = 8,
  Io = 9,
  Config = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const { return code_; }
  const std::string& stage() const { return stage_; }

 private:
  ErrorCode code_;
  std::string stage_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& stage, const std::string& message) {
  throw Error(code, stage, message);
}

}  // namespace nearsing
