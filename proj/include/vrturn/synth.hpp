#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrturn/recording.hpp"
#include "vrturn/speech.hpp"

namespace vrturn {

/// Nonverbal behavior injected for the upcoming speaker in the second before
/// each clean or overlapping turn onset. Each cue fires independently with
/// `probability` per onset.
struct CueConfig {
  double head_raise = 0.15;       // m/s of head y velocity
  double hand_raise = 0.25;       // m/s of left-hand y velocity
  double gaze_convergence = 25.0; // degrees other listeners turn toward the upcoming speaker
  double nod_amplitude = 60.0;    // deg/s pitch velocity amplitude of a 2 Hz nod
  double extraversion_weight = 0.8;  // log-odds per trait point when picking the next speaker
  double probability = 0.35;

  static CueConfig none();
  static CueConfig medium() { return {}; }
  static CueConfig large();
};

struct TurnConfig {
  double min_turn = 1.5;
  double max_turn = 5.0;
  int max_ipus = 3;
  double micro_pause_min = 0.1;
  double micro_pause_max = 0.33;
  double p_continue = 0.3;
  double continue_gap_min = 0.8;
  double continue_gap_max = 1.6;
  double p_overlap = 0.3;
  double overlap_min = 0.4;
  double overlap_max = 0.9;
  double clean_gap_min = 0.2;
  double clean_gap_max = 1.2;
  double p_backchannel = 0.3;
  double backchannel_min = 0.15;
  double backchannel_max = 0.6;
};

struct MotionNoise {
  double position_sd = 0.02;  // m, stationary sd of head and root position noise
  double head_height_sd = 0.01;
  double hand_position_sd = 0.03;
  double angle_sd = 5.0;  // deg
  double hand_angle_sd = 8.0;
  double damping = 2.0;   // 1/s
  double stiffness = 1.0; // 1/s^2
  double gaze_lag = 0.25; // s, head yaw time constant toward its gaze target
};

struct SynthConfig {
  std::string session_id = "s01";
  std::string group_id = "g01";
  int week = 1;
  std::size_t group_size = 4;
  double duration = 300.0;
  std::vector<std::string> user_ids;  // generated when empty
  std::vector<Big5> traits;           // sampled when empty
  TurnConfig turns;
  CueConfig cues;
  MotionNoise noise;
  std::uint64_t seed = 1;

  /// Throws InvalidConfig.
  void validate() const;
};

struct ScriptedSpeech {
  std::string user_id;
  double start = 0.0;
  double end = 0.0;
  bool backchannel = false;
};

struct ScriptedTransition {
  TransitionCategory category = TransitionCategory::CleanTurnTaking;
  double onset = 0.0;
  std::string new_speaker_id;
  std::string previous_speaker_id;
  double duration = 0.0;  // of the triggering speech
  bool expect_filtered = false;  // shorter than the labeling noise filter
};

struct CueInterval {
  std::string user_id;
  std::string cue;  // head_raise, hand_raise, nod, gaze
  double start = 0.0;
  double end = 0.0;
};

struct GroundTruth {
  std::string session_id;
  std::vector<ScriptedSpeech> speech;
  std::vector<ScriptedTransition> transitions;
  std::vector<CueInterval> cues;

  std::string to_json() const;
  static GroundTruth from_json(std::string_view text);
};

struct SynthSession {
  SessionRecording recording;
  GroundTruth truth;
};

SynthSession generate_session(const SynthConfig& cfg);

/// groups x sessions_per_group sessions. Group sizes go 4, 4, 3, 3, ...;
/// even groups meet in weeks 1 and 3, odd groups in weeks 2 and 4. A group
/// keeps its members and their traits across sessions.
struct CorpusConfig {
  std::size_t groups = 10;
  std::size_t sessions_per_group = 2;
  double duration = 300.0;
  TurnConfig turns;
  CueConfig cues;
  MotionNoise noise;
  std::uint64_t seed = 1;

  std::string to_json() const;
  /// Missing keys keep their defaults.
  static CorpusConfig from_json(std::string_view text);
};

std::vector<SynthConfig> corpus_session_configs(const CorpusConfig& cfg);
std::vector<SynthSession> generate_corpus(const CorpusConfig& cfg, int jobs = 1);

std::filesystem::path truth_path(const std::filesystem::path& dir, const std::string& session_id);

struct LabelingScore {
  std::size_t expected = 0;
  std::size_t recovered = 0;  // same speaker, same category, onset within one frame
  std::size_t spurious = 0;   // labeled transitions with no scripted counterpart
  std::size_t expected_filtered = 0;
  std::size_t filtered_ok = 0;  // short scripted events that produced no transition
  // confusion[scripted category][labeled category or "none"]
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  double max_onset_error = 0.0;
  double mean_onset_error = 0.0;

  std::string to_json() const;
};

LabelingScore verify_labeling(const SessionRecording& rec, const GroundTruth& truth, const LabelConfig& cfg = {});

}  // namespace vrturn
