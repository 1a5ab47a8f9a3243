#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vrturn/recording.hpp"
#include "vrturn/speech.hpp"

namespace vrturn {

enum class FeatureGroup { Speech, Traits, Egocentric, Dyadic, GroupRelation };
enum class FeatureKind { Continuous, Binary, OneHot };

std::string_view to_string(FeatureGroup g);
std::string_view to_string(FeatureKind k);
FeatureGroup parse_feature_group(std::string_view s);
FeatureKind parse_feature_kind(std::string_view s);

struct FeatureSpec {
  std::string name;
  FeatureGroup group = FeatureGroup::Speech;
  FeatureKind kind = FeatureKind::Continuous;

  bool operator==(const FeatureSpec&) const = default;
};

/// Ordered, named feature columns. Immutable once built.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureSpec> specs);

  /// Columns named f0..f{n-1}, all continuous; for toy data and tests.
  static FeatureSchema continuous(std::size_t n, std::string_view prefix = "f");

  std::size_t size() const { return specs_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return specs_[i]; }
  const std::vector<FeatureSpec>& specs() const { return specs_; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws InvalidConfig for unknown names.
  std::size_t index_of(std::string_view name) const;
  /// Columns whose name matches a glob pattern ('*' and '?').
  std::vector<std::size_t> match(std::string_view pattern) const;

  const std::string& hash() const { return hash_; }

  std::string to_json() const;
  static FeatureSchema from_json(std::string_view text);

 private:
  std::vector<FeatureSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string hash_;
};

bool glob_match(std::string_view pattern, std::string_view text);

/// Column layout: 43 speech, 16 traits, 216 egocentric, 36 dyadic, 72 group.
const FeatureSchema& turn_taking_schema();

inline constexpr std::size_t kSpeechSequenceLength = 10;
inline constexpr std::size_t kEgocentricPerUser = 108;
inline constexpr std::size_t kDyadicCount = 36;
inline constexpr std::size_t kGroupRelationCount = 72;
inline constexpr std::array<double, 3> kSharedSpaceLengths = {1.0, 5.0, 10.0};

struct Provenance {
  std::string session_id;
  std::string group_id;
  int week = 1;
  double onset = 0.0;
  std::string main_user;
  std::string reference_user;

  bool operator==(const Provenance&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  Provenance provenance;
};

struct FeatureConfig {
  double window = 1.0;
  std::array<double, 3> shared_space_lengths = kSharedSpaceLengths;
};

/// u = main user; a, b, c = other speakers in order of first appearance
/// walking backward; NA = no earlier turn.
enum class TurnSymbol { U = 0, A = 1, B = 2, C = 3, NA = 4 };

/// Speakers of the main-speaker turns that started before t, most recent
/// first. Consecutive segments of one speaker form a single turn.
std::vector<std::string> turns_before(const MainSpeakerTimeline& timeline, double t);

std::array<TurnSymbol, kSpeechSequenceLength> speech_sequence_symbols(const MainSpeakerTimeline& timeline,
                                                                      std::string_view main_user, double t);
/// One-hot over {u, a, b, c} per turn index; NA turns are all zero.
std::vector<double> speech_sequence_features(const MainSpeakerTimeline& timeline, std::string_view main_user,
                                             double t);

struct SpeechRecency {
  double turns_since_last_speech = 0.0;
  double time_since_last_speech_end = 0.0;
  bool has_spoken = false;
};

/// Turn index 1 is the turn in progress or most recently finished. When the
/// main user has not spoken, turns = (turns so far) + 1 and time = seconds
/// since session_start.
SpeechRecency speech_recency_features(const MainSpeakerTimeline& timeline, std::string_view main_user, double t,
                                      double session_start);

/// Main user's Big-5, reference user's Big-5, group mean Big-5, group size.
std::array<double, 16> trait_features(const SessionManifest& manifest, std::string_view main_user,
                                      std::string_view ref_user);

/// Summary statistics over a series, in schema order.
struct SeriesStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};
SeriesStats summarize(std::span<const double> values);

/// 3 devices x 6 DOF x {raw, velocity} x {min, max, mean}.
std::vector<double> egocentric_features(const FrameWindow& window, std::string_view user_id);

/// Gaze main->ref, gaze ref->main, distance, shared space at three lengths;
/// each as {raw, velocity} x {min, max, mean}.
std::vector<double> dyadic_features(const FrameWindow& window, std::string_view main_user,
                                    std::string_view ref_user, const FeatureConfig& cfg = {});

/// For main then reference user: gaze to others, gaze from others, distance,
/// shared space at three lengths; each pair's window mean of {raw, velocity}
/// summarized across the remaining members by {min, max, mean}.
std::vector<double> group_relationship_features(const FrameWindow& window, std::string_view main_user,
                                                std::string_view ref_user, const FeatureConfig& cfg = {});

/// Full feature row for one moment. Uses frames in [t - window, t) only.
FeatureVector extract_sample(const SessionRecording& rec, const MainSpeakerTimeline& timeline, double t,
                             std::string_view main_user, std::string_view ref_user, const FeatureConfig& cfg = {});

}  // namespace vrturn
