#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vrturn {

inline constexpr double kFrameRate = 30.0;
inline constexpr double kFramePeriod = 1.0 / kFrameRate;
/// Slack used for every timestamp comparison against a frame clock.
inline constexpr double kTimeEpsilon = 1e-9;
/// Nearest-frame tolerance when resampling users onto the common clock.
inline constexpr double kAlignmentTolerance = 1.0 / 60.0;

/// Position in meters, orientation in degrees. y is vertical, x-z is the
/// horizontal plane. Positive pitch rotates the head downward.
struct DevicePose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  bool operator==(const DevicePose&) const = default;
};

/// One user's tracked devices at one instant. root is in world space; head
/// and hands are relative to root.
struct UserFrame {
  double timestamp = 0.0;
  std::string user_id;
  DevicePose root;
  DevicePose head;
  DevicePose left_hand;
  DevicePose right_hand;
  double volume = 0.0;

  bool operator==(const UserFrame&) const = default;
};

struct Big5 {
  double openness = 4.0;
  double conscientiousness = 4.0;
  double extraversion = 4.0;
  double agreeableness = 4.0;
  double neuroticism = 4.0;

  bool operator==(const Big5&) const = default;
};

struct UserInfo {
  std::string user_id;
  Big5 big5;

  bool operator==(const UserInfo&) const = default;
};

struct SessionManifest {
  std::string session_id;
  std::string group_id;
  int week = 1;
  std::vector<UserInfo> users;

  /// Throws UnknownUser.
  std::size_t index_of(std::string_view user_id) const;
  const UserInfo& user(std::string_view user_id) const { return users[index_of(user_id)]; }
  bool contains(std::string_view user_id) const;

  bool operator==(const SessionManifest&) const = default;
};

struct UserStream {
  std::string user_id;
  std::vector<UserFrame> frames;  // strictly increasing timestamps on the common clock
};

struct AlignmentDrop {
  std::string user_id;
  std::size_t dropped = 0;
};

struct SessionRecording {
  SessionManifest manifest;
  std::vector<UserStream> streams;  // manifest roster order
  std::vector<AlignmentDrop> alignment_drops;

  const UserStream& stream(std::string_view user_id) const;
  /// Span of the common (first user's) clock: first timestamp and last
  /// timestamp plus one frame period.
  double start_time() const;
  double end_time() const;
};

struct UserSlice {
  std::string user_id;
  std::span<const UserFrame> frames;
};

/// Frames with start <= t < start + duration for each user. Views into the
/// recording it was sliced from.
struct FrameWindow {
  double start = 0.0;
  double duration = 0.0;
  std::vector<UserSlice> users;

  /// Throws UnknownUser.
  const UserSlice& user(std::string_view user_id) const;
};

struct GapWarning {
  std::string user_id;
  double after = 0.0;  // timestamp of the frame preceding the gap
  double gap = 0.0;    // missing time, i.e. delta minus one frame period
};

struct UserValidation {
  std::string user_id;
  std::size_t frame_count = 0;
  double speech_fraction = 0.0;
};

struct ValidationReport {
  std::string session_id;
  std::vector<UserValidation> users;
  std::vector<GapWarning> gaps;
  std::vector<AlignmentDrop> alignment_drops;
  double speech_fraction = 0.0;

  std::string to_json() const;
};

void validate_pose(const DevicePose& pose, std::string_view context);
void validate_frame(const UserFrame& frame);
void validate_manifest(const SessionManifest& manifest);

SessionManifest parse_manifest(std::string_view text);
std::string serialize_manifest(const SessionManifest& manifest);

/// Parses a frames document (one record per line). Blank lines are skipped.
std::vector<UserFrame> parse_frames(std::string_view text);
std::string serialize_frame(const UserFrame& frame);
/// Frames in time order, roster order within a timestamp.
std::string serialize_frames(const SessionRecording& rec);

/// Validates every frame against the manifest, then resamples all users onto
/// the first user's clock by nearest-timestamp match.
SessionRecording assemble_recording(SessionManifest manifest, std::vector<UserFrame> frames);

SessionRecording load_recording(const std::filesystem::path& manifest_path,
                                const std::filesystem::path& frames_path);
void save_recording(const SessionRecording& rec, const std::filesystem::path& manifest_path,
                    const std::filesystem::path& frames_path);

/// Recordings stored as <id>.manifest.json + <id>.frames.jsonl in one directory,
/// returned sorted by session id.
std::vector<SessionRecording> load_recording_dir(const std::filesystem::path& dir);
void save_recording_dir(const SessionRecording& rec, const std::filesystem::path& dir);

ValidationReport validate_recording(const SessionRecording& rec, double volume_threshold = 0.1);

/// Throws WindowOutOfRange or WindowTooSparse (< 2 frames for some user).
FrameWindow slice_window(const SessionRecording& rec, double start, double duration);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace vrturn
