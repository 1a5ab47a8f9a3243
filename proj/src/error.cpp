#include "vrturn/error.hpp"

namespace vrturn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::UserMismatch: return "UserMismatch";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::GroupTooLarge: return "GroupTooLarge";
    case ErrorCode::VolumeOutOfRange: return "VolumeOutOfRange";
    case ErrorCode::InvalidPose: return "InvalidPose";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::WindowTooSparse: return "WindowTooSparse";
    case ErrorCode::CoincidentHeads: return "CoincidentHeads";
    case ErrorCode::InsufficientEvents: return "InsufficientEvents";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::SingleClassInput: return "SingleClassInput";
    case ErrorCode::TooFewEntities: return "TooFewEntities";
    case ErrorCode::UnknownFeatureGroup: return "UnknownFeatureGroup";
    case ErrorCode::NonContinuousFeature: return "NonContinuousFeature";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) { return code != ErrorCode::Internal; }

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace vrturn
