#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrturn/recording.hpp"

namespace vrturn {

/// A maximal stretch of one user's speech (inter-pausal unit).
struct SpeechEvent {
  std::string user_id;
  double start = 0.0;
  double end = 0.0;

  double duration() const { return end - start; }
  bool operator==(const SpeechEvent&) const = default;
};

/// One main-speaker interval. event_start/event_end are the bounds of the
/// speech event the segment was cut from; start is clipped to the previous
/// main speaker's end when the two overlapped.
struct MainSegment {
  std::string speaker_id;
  double start = 0.0;
  double end = 0.0;
  double event_start = 0.0;
  double event_end = 0.0;

  bool operator==(const MainSegment&) const = default;
};

struct MainSpeakerTimeline {
  std::vector<MainSegment> segments;  // time-ordered, non-overlapping

  /// Segment whose [start, end) covers t, if any.
  const MainSegment* at(double t) const;
};

enum class TransitionCategory { CleanTurnTaking, OverlapTurnTaking, Backchannel, ContinuingSpeech };

std::string_view to_string(TransitionCategory c);
TransitionCategory parse_transition_category(std::string_view name);

struct TransitionEvent {
  TransitionCategory category = TransitionCategory::CleanTurnTaking;
  double onset = 0.0;  // start of the triggering speech event
  std::string new_speaker_id;
  std::optional<std::string> previous_speaker_id;
  double event_duration = 0.0;  // duration of the triggering speech event

  bool is_turn_taking() const {
    return category == TransitionCategory::CleanTurnTaking || category == TransitionCategory::OverlapTurnTaking;
  }
};

struct LabelConfig {
  double volume_threshold = 0.1;    // speech when volume is strictly above this
  double max_gap = 0.5;             // same-user events this close are joined
  double min_event_duration = 0.323;
};

/// Slack for comparing event boundaries derived from the frame clock.
inline constexpr double kLabelEpsilon = 1e-6;

/// Runs of consecutive frames with volume > threshold. An event spans from
/// the first frame's timestamp to the last frame's timestamp plus one frame
/// period. A clock gap of more than 1.5 frame periods ends a run.
std::vector<SpeechEvent> detect_ipus(std::string_view user_id, std::span<const double> timestamps,
                                     std::span<const double> volumes, double threshold = 0.1);
std::vector<SpeechEvent> detect_ipus(const UserStream& stream, double threshold = 0.1);

/// Joins same-user events whose gap is <= max_gap. Output ordered by
/// (start, user).
std::vector<SpeechEvent> smooth_ipus(std::vector<SpeechEvent> events, double max_gap = 0.5);

/// Removes events fully contained in another event, then gives each
/// remaining overlap to the later-ending event, whose segment starts where the
/// previous main speaker stopped.
MainSpeakerTimeline resolve_main_speaker(std::span<const SpeechEvent> all_events);

std::vector<TransitionEvent> categorize_transitions(const MainSpeakerTimeline& timeline,
                                                    std::span<const SpeechEvent> all_events,
                                                    double min_event_duration = 0.323);

struct SessionLabels {
  std::vector<SpeechEvent> events;  // smoothed, all users
  MainSpeakerTimeline timeline;
  std::vector<TransitionEvent> transitions;
};

SessionLabels label_session(const SessionRecording& rec, const LabelConfig& cfg = {});

/// Transitions document written by the `label` command.
std::string labels_to_json(const std::string& session_id, const SessionLabels& labels,
                           const std::string& config_hash);

}  // namespace vrturn
