#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vrturn/dataset.hpp"
#include "vrturn/error.hpp"
#include "vrturn/synth.hpp"

using namespace vrturn;

namespace {

const std::vector<SessionRecording>& corpus() {
  static const std::vector<SessionRecording> recs = [] {
    CorpusConfig c;
    c.groups = 4;
    c.sessions_per_group = 1;
    c.duration = 120;
    c.seed = 11;
    std::vector<SessionRecording> out;
    for (auto& s : generate_corpus(c, 4)) out.push_back(std::move(s.recording));
    return out;
  }();
  return recs;
}

}  // namespace

TEST_CASE("datasets are balanced, sorted and deterministic") {
  for (auto task : {Task::TurnVsContinue, Task::NextSpeaker, Task::Timing}) {
    CAPTURE(to_string(task));
    const auto ds = build_dataset(task, corpus(), 5);
    CHECK(ds.schema.hash() == turn_taking_schema().hash());
    CHECK(ds.size() > 20);
    CHECK(ds.positives() == ds.negatives());
    CHECK(ds.positives() == std::min(ds.candidate_positives, ds.candidate_negatives));
    for (std::size_t i = 1; i < ds.size(); ++i) {
      const auto& a = ds.rows[i - 1].provenance;
      const auto& b = ds.rows[i].provenance;
      CHECK(std::tie(a.session_id, a.onset, a.main_user, ds.labels[i - 1]) <=
            std::tie(b.session_id, b.onset, b.main_user, ds.labels[i]));
    }
    DatasetConfig par;
    par.jobs = 4;
    const auto again = build_dataset(task, corpus(), 5, par);
    CHECK(dataset_to_csv(again) == dataset_to_csv(ds));
    CHECK(dataset_to_csv(build_dataset(task, corpus(), 6)) != dataset_to_csv(ds));
  }
}

TEST_CASE("next-speaker rows never use the previous speaker as main") {
  const auto ds = build_dataset(Task::NextSpeaker, corpus(), 1);
  for (const auto& r : ds.rows) CHECK(r.provenance.main_user != r.provenance.reference_user);
}

TEST_CASE("timing negatives sit in silence of the upcoming speaker") {
  const auto sessions = label_sessions(corpus(), LabelConfig{});
  const auto ds = build_timing(sessions, 3);
  std::size_t negatives = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i]) continue;
    ++negatives;
    const auto& p = ds.rows[i].provenance;
    const LabeledSession* s = nullptr;
    for (const auto& ls : sessions)
      if (ls.recording->manifest.session_id == p.session_id) s = &ls;
    REQUIRE(s != nullptr);
    // the matching onset is a turn-taking transition of the main user at one of the offsets
    bool matched = false;
    for (const auto& tr : s->labels.transitions) {
      if (tr.new_speaker_id != p.main_user) continue;
      for (double off : DatasetConfig{}.timing_offsets) {
        if (std::abs(tr.onset - off - p.onset) > 1e-9) continue;
        bool quiet = true;
        for (const auto& e : s->labels.events)
          if (e.user_id == p.main_user && e.end > p.onset && e.start < tr.onset) quiet = false;
        matched = matched || quiet;
      }
    }
    CHECK(matched);
  }
  CHECK(negatives > 0);
}

TEST_CASE("csv round trip and schema checks") {
  const auto ds = build_dataset(Task::TurnVsContinue, corpus(), 2);
  const std::string csv = dataset_to_csv(ds, "abc");
  CHECK(csv.rfind("# {", 0) == 0);
  CHECK(csv.find("\"config_hash\":\"abc\"") != std::string::npos);
  const auto back = dataset_from_csv(csv, ds.schema);
  CHECK(back.task == ds.task);
  CHECK(back.labels == ds.labels);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.rows[i].values == ds.rows[i].values);
    CHECK(back.rows[i].provenance == ds.rows[i].provenance);
  }
  CHECK(dataset_to_csv(back, "abc") == csv);

  try {
    dataset_from_csv(csv, FeatureSchema::continuous(383));
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaMismatch);
  }

  const auto dir = std::filesystem::temp_directory_path() / "vrturn_dataset_test";
  std::filesystem::create_directories(dir);
  save_dataset(ds, dir / "d.csv");
  CHECK(dataset_to_csv(load_dataset(dir / "d.csv")) == dataset_to_csv(ds));
  {
    std::ofstream f(schema_sidecar_path(dir / "d.csv"));
    f << FeatureSchema::continuous(3).to_json();
  }
  try {
    load_dataset(dir / "d.csv");
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaMismatch);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("next-speaker needs three people") {
  SessionRecording rec;
  rec.manifest.session_id = "pair";
  rec.manifest.users = {{"a", {}}, {"b", {}}};
  std::vector<LabeledSession> sessions = {{&rec, {}}};
  try {
    build_next_speaker(sessions, 1);
    FAIL("expected GroupTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GroupTooSmall);
  }
}
