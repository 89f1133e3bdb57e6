#pragma once

#include <stdexcept>
#include <string>

namespace pixplore {

enum class ErrorCode {
  kImageTooSmall,
  kInvalidArgument,
  kDegenerateBox,
  kMalformedLayout,
  kEmptyTrainingSet,
  kDimensionMismatch,
  kTrainingDiverged,
  kInsufficientMemory,
  kInvalidScreen,
  kGenerationInfeasible,
  kTargetOutOfRange,
  kConfig,
  kUniverseMismatch,
  kEmptyLog,
  kIo,
  kEnvironment,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pixplore
