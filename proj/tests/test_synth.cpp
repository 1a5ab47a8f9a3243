#include <doctest.h>

#include "vrturn/dataset.hpp"
#include "vrturn/error.hpp"
#include "vrturn/evaluation.hpp"
#include "vrturn/synth.hpp"

using namespace vrturn;

namespace {

SynthConfig short_session(std::uint64_t seed) {
  SynthConfig c;
  c.duration = 90;
  c.seed = seed;
  return c;
}

std::vector<SessionRecording> recordings(const CorpusConfig& c) {
  std::vector<SessionRecording> out;
  for (auto& s : generate_corpus(c, 4)) out.push_back(std::move(s.recording));
  return out;
}

}  // namespace

TEST_CASE("same seed, same session") {
  const auto a = generate_session(short_session(3));
  const auto b = generate_session(short_session(3));
  CHECK(serialize_frames(a.recording) == serialize_frames(b.recording));
  CHECK(a.truth.to_json() == b.truth.to_json());
  CHECK(serialize_frames(generate_session(short_session(4)).recording) != serialize_frames(a.recording));
  CHECK_NOTHROW(validate_recording(a.recording));
  CHECK(a.recording.manifest.users.size() == 4);
}

TEST_CASE("labeling recovers the scripted transitions") {
  for (std::uint64_t seed : {1, 2, 3}) {
    CAPTURE(seed);
    const auto s = generate_session(short_session(seed));
    const auto score = verify_labeling(s.recording, s.truth);
    CHECK(score.expected > 10);
    CHECK(score.recovered == score.expected);
    CHECK(score.spurious == 0);
    CHECK(score.filtered_ok == score.expected_filtered);
    CHECK(score.max_onset_error <= 1.0 / kFrameRate + 1e-9);
  }
}

TEST_CASE("ground truth round trips") {
  const auto s = generate_session(short_session(8));
  CHECK(GroundTruth::from_json(s.truth.to_json()).to_json() == s.truth.to_json());
  CHECK(!s.truth.cues.empty());
}

TEST_CASE("bad synth configs") {
  auto c = short_session(1);
  c.group_size = 5;
  CHECK_THROWS_AS(generate_session(c), Error);
  c = short_session(1);
  c.duration = -1;
  try {
    generate_session(c);
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
  CorpusConfig cc;
  cc.sessions_per_group = 5;
  CHECK_THROWS_AS(generate_corpus(cc), Error);
  CHECK_THROWS_AS(CorpusConfig::from_json(R"({"cues": "huge"})"), Error);
  CHECK(CorpusConfig::from_json(R"({"cues": "none"})").cues.probability == 0.0);
  const auto big = CorpusConfig::from_json(R"({"cues": "large", "groups": 3})");
  CHECK(big.groups == 3);
  CHECK(CorpusConfig::from_json(big.to_json()).to_json() == big.to_json());
}

TEST_CASE("corpus layout") {
  CorpusConfig c;
  c.groups = 4;
  c.sessions_per_group = 2;
  const auto cfgs = corpus_session_configs(c);
  REQUIRE(cfgs.size() == 8);
  for (const auto& s : cfgs) {
    const int g = std::stoi(s.group_id.substr(1)) - 1;
    CHECK(s.group_size == ((g / 2) % 2 == 0 ? 4u : 3u));
    CHECK(s.week % 2 == (g % 2 == 0 ? 1 : 0));
  }
}

TEST_CASE("a pure head raise shows up at its injected speed") {
  CorpusConfig c;
  c.groups = 4;
  c.sessions_per_group = 1;
  c.duration = 150;
  c.cues = CueConfig::none();
  c.cues.head_raise = 0.3;
  c.cues.probability = 1.0;
  const auto ds = build_dataset(Task::NextSpeaker, recordings(c), 1);
  const std::size_t col = ds.schema.index_of("ego.main.head.y.vel.mean");
  double pos = 0, neg = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) (ds.labels[i] ? pos : neg) += ds.rows[i].values[col];
  pos /= static_cast<double>(ds.positives());
  neg /= static_cast<double>(ds.negatives());
  CHECK(pos == doctest::Approx(0.3).epsilon(0.1));
  CHECK(std::abs(neg) < 0.03);
}

TEST_CASE("stronger gaze convergence is easier to detect") {
  std::vector<double> aucs;
  for (int level = 0; level < 3; ++level) {
    CorpusConfig c;
    c.groups = 6;
    c.sessions_per_group = 2;
    c.duration = 150;
    c.seed = 4;
    c.cues = CueConfig::none();
    if (level > 0) {
      c.cues.gaze_convergence = level == 1 ? CueConfig::medium().gaze_convergence : CueConfig::large().gaze_convergence;
      c.cues.probability = level == 1 ? CueConfig::medium().probability : CueConfig::large().probability;
    }
    const auto ds = build_dataset(Task::NextSpeaker, recordings(c), 1);
    ModelConfig m = ModelConfig::defaults(ModelFamily::GradientBoosting);
    m.gbm.n_trees = 50;
    aucs.push_back(run_cv(ds, m, CvScheme::SessionCV, 1, 4, 6).mean_auc);
  }
  MESSAGE("gaze AUC none/medium/large: " << aucs[0] << " " << aucs[1] << " " << aucs[2]);
  CHECK(aucs[0] < aucs[1]);
  CHECK(aucs[1] < aucs[2]);
}
