#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sphtraj {

enum class ErrorCode {
  InvalidPoint,
  NotTangent,
  InvalidRotation,
  AntipodalPoints,
  AntipodalOrIdentical,
  MixedBasePoints,
  FrameDegenerate,
  DegenerateTrajectory,
  InvalidWarp,
  GridMismatch,
  AntipodalStartPoints,
  SingularSystem,
  EmptyDataset,
  NoConvergence,
  DegenerateMean,
  RankTooLarge,
  IndexOutOfRange,
  InvalidK,
  MalformedHeader,
  MalformedDataLine,
  MalformedInput,
  UnsupportedCombination,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sphtraj
