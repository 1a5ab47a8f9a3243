#include <doctest.h>

#include "labelcases.hpp"
#include "support.hpp"
#include "vrturn/speech.hpp"

using namespace vrturn;
using C = TransitionCategory;

namespace {

std::vector<double> frames_ts(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = i / kFrameRate;
  return t;
}

SpeechEvent ev(const std::string& u, double s, double e) { return SpeechEvent{u, s, e}; }

}  // namespace

TEST_CASE("ipu detection") {
  const auto t = frames_ts(5);
  const std::vector<double> v = {0, .2, .2, 0, 0};
  const auto e = detect_ipus("a", t, v);
  REQUIRE(e.size() == 1);
  CHECK(e[0].start == doctest::Approx(1 / 30.0));
  CHECK(e[0].end == doctest::Approx(3 / 30.0));
  CHECK(detect_ipus("a", t, std::vector<double>{.1, .1, .05, 0, .1}).empty());
  CHECK(detect_ipus("a", frames_ts(3), std::vector<double>{.2, 0, .2}).size() == 2);
}

TEST_CASE("smoothing joins same-user gaps up to 0.5 s") {
  CHECK(smooth_ipus({ev("a", 0, 1), ev("a", 1.3, 2)}).size() == 1);
  CHECK(smooth_ipus({ev("a", 0, 1), ev("a", 1.5, 2)}).size() == 1);
  CHECK(smooth_ipus({ev("a", 0, 1), ev("a", 1.51, 2)}).size() == 2);
  CHECK(smooth_ipus({ev("a", 0, 1), ev("b", 1.1, 2)}).size() == 2);
}

TEST_CASE("main speaker resolution") {
  SUBCASE("containment") {
    const std::vector<SpeechEvent> e = {ev("A", 0, 2), ev("B", 0.5, 1.5)};
    const auto tl = resolve_main_speaker(e);
    REQUIRE(tl.segments.size() == 1);
    CHECK(tl.segments[0].speaker_id == "A");
  }
  SUBCASE("partial overlap clips the later speaker") {
    const std::vector<SpeechEvent> e = {ev("A", 0, 2), ev("B", 1, 3)};
    const auto tl = resolve_main_speaker(e);
    REQUIRE(tl.segments.size() == 2);
    CHECK(tl.segments[1].speaker_id == "B");
    CHECK(tl.segments[1].start == 2.0);
    CHECK(tl.segments[1].event_start == 1.0);
  }
  SUBCASE("identical events keep the lowest id") {
    const std::vector<SpeechEvent> e = {ev("B", 0, 1), ev("A", 0, 1)};
    const auto tl = resolve_main_speaker(e);
    REQUIRE(tl.segments.size() == 1);
    CHECK(tl.segments[0].speaker_id == "A");
  }
}

TEST_CASE("categories from the operation examples") {
  {
    const std::vector<SpeechEvent> e = {ev("A", 3, 5), ev("B", 5.4, 7)};
    const auto tr = categorize_transitions(resolve_main_speaker(e), e);
    REQUIRE(tr.size() == 1);
    CHECK(tr[0].category == C::CleanTurnTaking);
    CHECK(tr[0].onset == 5.4);
    CHECK(tr[0].previous_speaker_id == "A");
  }
  {
    const std::vector<SpeechEvent> e = {ev("A", 0, 2), ev("B", 1.5, 3)};
    const auto tr = categorize_transitions(resolve_main_speaker(e), e);
    REQUIRE(tr.size() == 1);
    CHECK(tr[0].category == C::OverlapTurnTaking);
    CHECK(tr[0].onset == 1.5);
  }
  {
    const std::vector<SpeechEvent> e = {ev("A", 0, 2), ev("B", 1.0, 1.2)};
    CHECK(categorize_transitions(resolve_main_speaker(e), e).empty());
  }
}

TEST_CASE("figure scenarios are recovered exactly") {
  for (const auto& sc : labelcases::scenarios()) {
    CAPTURE(sc.name);
    const auto labels = label_session(labelcases::recording(sc));
    CHECK(labelcases::check(sc, labels) == "");
    for (const auto& tr : labels.transitions) {
      if (tr.category == C::Backchannel) continue;
      // invariants: clean onsets never overlap the previous segment, overlap onsets precede it
      const MainSegment* prev = nullptr;
      for (const auto& seg : labels.timeline.segments) {
        if (seg.event_start == tr.onset && seg.speaker_id == tr.new_speaker_id) break;
        prev = &seg;
      }
      REQUIRE(prev != nullptr);
      if (tr.category == C::CleanTurnTaking) CHECK(tr.onset >= prev->end - 1e-9);
      if (tr.category == C::OverlapTurnTaking) CHECK(tr.onset < prev->end);
    }
  }
}

TEST_CASE("user order does not change labels") {
  const auto sc = labelcases::scenarios().front();
  auto rec = labelcases::recording(sc);
  auto a = label_session(rec);
  std::reverse(rec.streams.begin(), rec.streams.end());
  auto b = label_session(rec);
  REQUIRE(a.transitions.size() == b.transitions.size());
  for (std::size_t i = 0; i < a.transitions.size(); ++i) {
    CHECK(a.transitions[i].onset == b.transitions[i].onset);
    CHECK(a.transitions[i].category == b.transitions[i].category);
    CHECK(a.transitions[i].new_speaker_id == b.transitions[i].new_speaker_id);
  }
  CHECK(a.timeline.segments == b.timeline.segments);
}

TEST_CASE("volume threshold is strict") {
  const auto t = frames_ts(3);
  CHECK(detect_ipus("a", t, std::vector<double>{0.1, 0.1, 0.1}).empty());
  CHECK(detect_ipus("a", t, std::vector<double>{0.1, 0.1000001, 0.1}).size() == 1);
}
