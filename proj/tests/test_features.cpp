#include <doctest.h>

#include <map>

#include "support.hpp"
#include "vrturn/error.hpp"
#include "vrturn/features.hpp"
#include "vrturn/geometry.hpp"

using namespace vrturn;

namespace {

MainSpeakerTimeline timeline(std::vector<std::pair<std::string, std::pair<double, double>>> segs) {
  MainSpeakerTimeline tl;
  for (auto& [who, span] : segs) tl.segments.push_back({who, span.first, span.second, span.first, span.second});
  return tl;
}

}  // namespace

TEST_CASE("schema layout") {
  const auto& s = turn_taking_schema();
  CHECK(s.size() == 383);
  std::map<FeatureGroup, int> counts;
  for (const auto& f : s.specs()) counts[f.group]++;
  CHECK(counts[FeatureGroup::Speech] == 43);
  CHECK(counts[FeatureGroup::Traits] == 16);
  CHECK(counts[FeatureGroup::Egocentric] == 216);
  CHECK(counts[FeatureGroup::Dyadic] == 36);
  CHECK(counts[FeatureGroup::GroupRelation] == 72);
  CHECK(s[0].name == "speech.seq.1.u");
  CHECK(s[0].kind == FeatureKind::OneHot);
  CHECK(s.index_of("speech.main.has_spoken") == 42);
  CHECK(s[42].kind == FeatureKind::Binary);
  CHECK(s.match("ego.main.head.pitch.vel.*").size() == 3);
  CHECK(s.match("dyad.vss?.raw.mean").size() == 2);
  CHECK(s.match("dyad.vss*.raw.mean").size() == 3);
  CHECK_THROWS_AS(s.index_of("nope"), Error);
  const auto back = FeatureSchema::from_json(s.to_json());
  CHECK(back.hash() == s.hash());
  CHECK(back.specs() == s.specs());
}

TEST_CASE("glob matching") {
  CHECK(glob_match("a*c", "abbbc"));
  CHECK(glob_match("a?c", "abc"));
  CHECK_FALSE(glob_match("a?c", "abbc"));
  CHECK(glob_match("*", ""));
}

TEST_CASE("speech sequence symbols walk backward") {
  const auto tl = timeline({{"A", {0, 1}}, {"B", {1, 2}}, {"A", {2, 3}}, {"C", {3, 4}}});
  const auto sym = speech_sequence_symbols(tl, "B", 3.5);
  CHECK(sym[0] == TurnSymbol::A);  // C
  CHECK(sym[1] == TurnSymbol::B);  // A
  CHECK(sym[2] == TurnSymbol::U);
  CHECK(sym[3] == TurnSymbol::B);
  CHECK(sym[4] == TurnSymbol::NA);
  const auto f = speech_sequence_features(tl, "B", 3.5);
  CHECK(f[0 * 4 + 1] == 1.0);
  CHECK(f[2 * 4 + 0] == 1.0);
  double sum = 0;
  for (double v : f) sum += v;
  CHECK(sum == 4.0);
  // turns starting at or after t are not visible
  CHECK(turns_before(tl, 3.0).size() == 3);
}

TEST_CASE("consecutive segments of one speaker are one turn") {
  const auto tl = timeline({{"A", {0, 1}}, {"A", {1.8, 2.5}}, {"B", {3, 4}}});
  CHECK(turns_before(tl, 5).size() == 2);
}

TEST_CASE("speech recency") {
  const auto tl = timeline({{"A", {0, 1}}, {"B", {1, 2}}, {"A", {2, 3}}, {"C", {3, 4}}});
  const auto b = speech_recency_features(tl, "B", 3.5, 0.0);
  CHECK(b.has_spoken);
  CHECK(b.turns_since_last_speech == 3);
  CHECK(b.time_since_last_speech_end == doctest::Approx(1.5));
  const auto d = speech_recency_features(tl, "D", 3.5, -1.0);
  CHECK_FALSE(d.has_spoken);
  CHECK(d.turns_since_last_speech == 5);
  CHECK(d.time_since_last_speech_end == doctest::Approx(4.5));
  const auto c = speech_recency_features(tl, "C", 3.5, 0.0);
  CHECK(c.turns_since_last_speech == 1);
  CHECK(c.time_since_last_speech_end == 0.0);
}

TEST_CASE("trait features") {
  SessionManifest m;
  m.users = {{"a", {1, 2, 3, 4, 5}}, {"b", {7, 6, 5, 4, 3}}, {"c", {1, 1, 1, 1, 1}}};
  const auto t = trait_features(m, "a", "b");
  CHECK(t[0] == 1);
  CHECK(t[5] == 7);
  CHECK(t[10] == doctest::Approx(3));
  CHECK(t[12] == doctest::Approx(3));
  CHECK(t[15] == 3);
}

TEST_CASE("summary statistics") {
  const auto s = summarize(std::vector<double>{3, -1, 4});
  CHECK(s.min == -1);
  CHECK(s.max == 4);
  CHECK(s.mean == doctest::Approx(2));
}

TEST_CASE("egocentric block has exactly the structurally zero slots") {
  const auto rec = testsupport::random_motion_recording(9, 3, 12.0);
  const auto tl = timeline({{"p0", {0, 1}}, {"p1", {1, 2}}});
  const auto& schema = turn_taking_schema();
  std::vector<bool> all_zero(schema.size(), true);
  for (double t = 2.0; t < 11.5; t += 0.37) {
    const auto fv = extract_sample(rec, tl, t, "p2", "p1");
    for (std::size_t j = 0; j < fv.values.size(); ++j)
      if (fv.values[j] != 0.0) all_zero[j] = false;
  }
  std::vector<std::string> zero;
  for (std::size_t j = 0; j < schema.size(); ++j)
    if (schema[j].group == FeatureGroup::Egocentric && all_zero[j]) zero.push_back(schema[j].name);
  CHECK(zero.size() == 18);
  for (const auto& n : zero) {
    CAPTURE(n);
    const bool expected = n.find(".head.x.raw.") != std::string::npos || n.find(".head.z.raw.") != std::string::npos ||
                          n.find(".head.yaw.raw.") != std::string::npos;
    CHECK(expected);
  }
}

TEST_CASE("features ignore frames at or after t") {
  auto rec = testsupport::random_motion_recording(4, 4, 6.0);
  const auto tl = timeline({{"p0", {0, 1}}, {"p1", {1, 2.5}}});
  const double t = 3.0;
  const auto before = extract_sample(rec, tl, t, "p2", "p1");
  for (auto& s : rec.streams)
    for (auto& f : s.frames)
      if (f.timestamp >= t - 1e-9) {
        f.head.y += 0.3;
        f.root.x += 0.5;
        f.head.yaw = wrap_degrees(f.head.yaw + 40);
      }
  const auto after = extract_sample(rec, tl, t, "p2", "p1");
  CHECK(before.values == after.values);
  CHECK(before.provenance.main_user == "p2");
  CHECK(before.provenance.reference_user == "p1");
  CHECK(before.provenance.onset == t);
}

TEST_CASE("dyadic features for two static users facing each other") {
  testsupport::Span none{0, 0};
  (void)none;
  const auto rec = testsupport::volume_recording({std::vector<double>(60, 0.0), std::vector<double>(60, 0.0),
                                                  std::vector<double>(60, 0.0)});
  const auto w = slice_window(rec, 0.5, 1.0);
  const auto d = dyadic_features(w, "u1", "u2");
  REQUIRE(d.size() == 36);
  // head-to-head gaze: seated on the unit circle facing the center
  CHECK(d[0] == doctest::Approx(30.0));
  CHECK(d[3] == doctest::Approx(0.0));
  CHECK(d[12] == doctest::Approx(std::sqrt(3.0)));
  const auto g = group_relationship_features(w, "u1", "u2");
  CHECK(g.size() == 72);
}

TEST_CASE("window errors surface") {
  const auto rec = testsupport::random_motion_recording(2, 3, 3.0);
  const auto tl = timeline({{"p0", {0, 1}}});
  try {
    extract_sample(rec, tl, 0.5, "p1", "p0");
    FAIL("expected WindowOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WindowOutOfRange);
  }
}
