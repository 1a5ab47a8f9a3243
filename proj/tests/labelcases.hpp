#pragma once

// Hand-encoded volume traces after the paper's speech-category figure, plus
// boundary cases. Frames at 30 Hz; users u1, u2, u3.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "support.hpp"
#include "vrturn/speech.hpp"

namespace labelcases {

using testsupport::Span;
using vrturn::TransitionCategory;

struct Expected {
  TransitionCategory category;
  int onset_frame;
  std::string new_speaker;
  std::string prev_speaker;
};

struct Scenario {
  std::string name;
  int frames;
  std::vector<std::vector<Span>> speech;  // per user
  std::vector<Expected> expected;
  std::vector<std::vector<std::string>> timeline;  // optional: expected main speakers in order
};

inline std::vector<Scenario> scenarios() {
  using C = TransitionCategory;
  std::vector<Scenario> s;
  s.push_back({"all four categories",
               420,
               {{{30, 60}, {66, 120}, {220, 235}},
                {{141, 210}, {310, 319}, {340, 350}},
                {{195, 270}, {300, 360}}},
               {{C::CleanTurnTaking, 141, "u2", "u1"},
                {C::OverlapTurnTaking, 195, "u3", "u2"},
                {C::Backchannel, 220, "u1", "u3"},
                {C::ContinuingSpeech, 300, "u3", "u3"},
                {C::Backchannel, 340, "u2", "u3"}},
               {{"u1", "u2", "u3", "u3"}}});
  s.push_back({"full containment", 150, {{{30, 120}}, {{60, 90}}}, {{C::Backchannel, 60, "u2", "u1"}}, {{"u1"}}});
  s.push_back({"partial overlap",
               180,
               {{{30, 90}}, {{60, 150}}},
               {{C::OverlapTurnTaking, 60, "u2", "u1"}},
               {{"u1", "u2"}}});
  s.push_back({"gap of exactly 0.5 s joins", 150, {{{30, 60}, {75, 105}}}, {}, {{"u1"}}});
  s.push_back({"gap just over 0.5 s keeps the turn",
               150,
               {{{30, 60}, {76, 106}}},
               {{C::ContinuingSpeech, 76, "u1", "u1"}},
               {{"u1", "u1"}}});
  s.push_back({"323 ms filter",
               300,
               {{{30, 120}, {180, 240}, {250, 280}}, {{150, 159}, {60, 70}}, {{100, 109}}},
               {{C::CleanTurnTaking, 180, "u1", "u2"}, {C::Backchannel, 60, "u2", "u1"}},
               {{"u1", "u2", "u1"}}});
  return s;
}

inline vrturn::SessionRecording recording(const Scenario& sc) {
  std::vector<std::vector<double>> volumes;
  for (const auto& spans : sc.speech) volumes.push_back(testsupport::trace(sc.frames, spans));
  while (volumes.size() < 3) volumes.push_back(testsupport::trace(sc.frames, {}));
  return testsupport::volume_recording(volumes, "cases");
}

// Empty when labels match; otherwise a description of the first mismatch.
inline std::string check(const Scenario& sc, const vrturn::SessionLabels& labels) {
  auto exp = sc.expected;
  std::sort(exp.begin(), exp.end(), [](const Expected& a, const Expected& b) { return a.onset_frame < b.onset_frame; });
  const auto& got = labels.transitions;
  if (got.size() != exp.size())
    return sc.name + ": expected " + std::to_string(exp.size()) + " transitions, got " + std::to_string(got.size());
  for (std::size_t i = 0; i < exp.size(); ++i) {
    const auto& g = got[i];
    const auto& e = exp[i];
    const double err = std::abs(g.onset - e.onset_frame / vrturn::kFrameRate);
    if (g.category != e.category || g.new_speaker_id != e.new_speaker || g.previous_speaker_id != e.prev_speaker ||
        err > vrturn::kFramePeriod + 1e-9)
      return sc.name + ": transition " + std::to_string(i) + " is " + std::string(vrturn::to_string(g.category)) +
             " by " + g.new_speaker_id + " at " + std::to_string(g.onset);
  }
  if (!sc.timeline.empty()) {
    std::vector<std::string> speakers;
    for (const auto& seg : labels.timeline.segments) speakers.push_back(seg.speaker_id);
    if (speakers != sc.timeline.front()) return sc.name + ": unexpected main-speaker timeline";
  }
  return {};
}

}  // namespace labelcases
