#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vrturn {

enum class ErrorCode {
  // Input errors: bad files, bad arguments, data that violates a type invariant.
  MalformedInput,
  UnknownUser,
  UserMismatch,
  GroupTooSmall,
  GroupTooLarge,
  VolumeOutOfRange,
  InvalidPose,
  NonMonotonicTime,
  WindowOutOfRange,
  WindowTooSparse,
  CoincidentHeads,
  InsufficientEvents,
  EmptyTrainingSet,
  NonFiniteInput,
  SchemaMismatch,
  SingleClassInput,
  TooFewEntities,
  UnknownFeatureGroup,
  NonContinuousFeature,
  InvalidConfig,
  Io,
  // Everything below is a broken internal invariant.
  Internal,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by the caller's data or arguments, false for
/// internal invariant failures.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace vrturn
