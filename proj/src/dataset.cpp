#include "vrturn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "vrturn/error.hpp"
#include "vrturn/numeric_format.hpp"
#include "vrturn/parallel.hpp"
#include "vrturn/rng.hpp"

namespace vrturn {

namespace {

struct Candidate {
  double t = 0.0;
  std::string main;
  std::string ref;
  int label = 0;
};

struct SessionRows {
  std::vector<FeatureVector> rows;
  std::vector<int> labels;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  SkipReport skipped;
};

bool window_error(ErrorCode c) {
  return c == ErrorCode::WindowOutOfRange || c == ErrorCode::WindowTooSparse || c == ErrorCode::CoincidentHeads;
}

const std::string* speaker_before(const MainSpeakerTimeline& timeline, double t) {
  const std::string* who = nullptr;
  for (const auto& s : timeline.segments) {
    if (!(s.start < t)) break;
    who = &s.speaker_id;
  }
  return who;
}

using CandidateFn = void (*)(const LabeledSession&, Rng&, const DatasetConfig&, std::vector<Candidate>&,
                             SkipReport&);

void turn_vs_continue_candidates(const LabeledSession& s, Rng& rng, const DatasetConfig&,
                                 std::vector<Candidate>& out, SkipReport& skipped) {
  const auto& users = s.recording->manifest.users;
  for (const auto& tr : s.labels.transitions) {
    if (!tr.previous_speaker_id) {
      ++skipped.no_reference;
      continue;
    }
    const std::string& prev = *tr.previous_speaker_id;
    if (tr.category == TransitionCategory::CleanTurnTaking) {
      out.push_back({tr.onset, tr.new_speaker_id, prev, 1});
    } else if (tr.category == TransitionCategory::ContinuingSpeech) {
      std::vector<std::string> pool;
      for (const auto& u : users) {
        if (u.user_id != prev) pool.push_back(u.user_id);
      }
      out.push_back({tr.onset, pool[rng.uniform_index(pool.size())], prev, 0});
    }
  }
}

void next_speaker_candidates(const LabeledSession& s, Rng&, const DatasetConfig&, std::vector<Candidate>& out,
                             SkipReport& skipped) {
  const auto& users = s.recording->manifest.users;
  for (const auto& tr : s.labels.transitions) {
    if (!tr.is_turn_taking()) continue;
    if (!tr.previous_speaker_id) {
      ++skipped.no_reference;
      continue;
    }
    const std::string& prev = *tr.previous_speaker_id;
    out.push_back({tr.onset, tr.new_speaker_id, prev, 1});
    for (const auto& u : users) {
      if (u.user_id != prev && u.user_id != tr.new_speaker_id) out.push_back({tr.onset, u.user_id, prev, 0});
    }
  }
}

void timing_candidates(const LabeledSession& s, Rng&, const DatasetConfig& cfg, std::vector<Candidate>& out,
                       SkipReport& skipped) {
  for (const auto& tr : s.labels.transitions) {
    if (!tr.is_turn_taking()) continue;
    if (!tr.previous_speaker_id) {
      ++skipped.no_reference;
      continue;
    }
    const std::string& upcoming = tr.new_speaker_id;
    out.push_back({tr.onset, upcoming, *tr.previous_speaker_id, 1});
    for (double offset : cfg.timing_offsets) {
      const double early = tr.onset - offset;
      const bool spoke = std::any_of(s.labels.events.begin(), s.labels.events.end(), [&](const SpeechEvent& e) {
        return e.user_id == upcoming && e.end > early && e.start < tr.onset;
      });
      if (spoke) {
        ++skipped.intervening_speech;
        continue;
      }
      const std::string* ref = speaker_before(s.labels.timeline, early);
      if (ref == nullptr || *ref == upcoming) {
        ++skipped.no_reference;
        continue;
      }
      out.push_back({early, upcoming, *ref, 0});
    }
  }
}

SessionRows session_rows(const LabeledSession& s, std::uint64_t seed, const DatasetConfig& cfg, CandidateFn fn) {
  SessionRows out;
  Rng rng(derive_seed(seed, "candidates:" + s.recording->manifest.session_id));
  std::vector<Candidate> cands;
  fn(s, rng, cfg, cands, out.skipped);

  std::set<std::pair<double, std::string>> positive_keys;
  for (const auto& c : cands) {
    if (c.label == 1) positive_keys.emplace(c.t, c.main);
  }
  for (const auto& c : cands) {
    if (c.label == 0 && positive_keys.count({c.t, c.main})) {
      ++out.skipped.duplicate;
      continue;
    }
    try {
      out.rows.push_back(extract_sample(*s.recording, s.labels.timeline, c.t, c.main, c.ref, cfg.features));
      out.labels.push_back(c.label);
      ++(c.label == 1 ? out.positives : out.negatives);
    } catch (const Error& e) {
      if (!window_error(e.code())) throw;
      ++out.skipped.invalid_window;
    }
  }
  return out;
}

LabeledDataset build_with(Task task, std::span<const LabeledSession> sessions, std::uint64_t seed,
                          const DatasetConfig& cfg, CandidateFn fn) {
  std::vector<SessionRows> parts(sessions.size());
  parallel_for(sessions.size(), cfg.jobs, [&](std::size_t i) { parts[i] = session_rows(sessions[i], seed, cfg, fn); });

  LabeledDataset ds;
  ds.task = task;
  ds.seed = seed;
  ds.schema = turn_taking_schema();
  for (auto& p : parts) {
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      ds.rows.push_back(std::move(p.rows[i]));
      ds.labels.push_back(p.labels[i]);
    }
    ds.candidate_positives += p.positives;
    ds.candidate_negatives += p.negatives;
    ds.skipped.invalid_window += p.skipped.invalid_window;
    ds.skipped.no_reference += p.skipped.no_reference;
    ds.skipped.intervening_speech += p.skipped.intervening_speech;
    ds.skipped.duplicate += p.skipped.duplicate;
  }
  if (ds.candidate_positives == 0 || ds.candidate_negatives == 0) {
    fail(ErrorCode::InsufficientEvents, std::string(to_string(task)) + ": " + std::to_string(ds.candidate_positives) +
                                            " positive and " + std::to_string(ds.candidate_negatives) +
                                            " negative samples");
  }
  balance_classes(ds, derive_seed(seed, "balance"));
  return ds;
}

void check_id(const std::string& id) {
  if (id.find_first_of(",\n\r\"") != std::string::npos)
    fail(ErrorCode::MalformedInput, "id '" + id + "' cannot be written to a dataset table");
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = line.find(',', pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_number(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorCode::MalformedInput, "dataset line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  return v;
}

const std::vector<std::string> kKeyColumns = {"session_id", "group_id",       "week", "onset",
                                              "main_user",  "reference_user", "label"};

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::TurnVsContinue: return "turn";
    case Task::NextSpeaker: return "next";
    case Task::Timing: return "timing";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  for (auto t : {Task::TurnVsContinue, Task::NextSpeaker, Task::Timing}) {
    if (to_string(t) == name) return t;
  }
  fail(ErrorCode::InvalidConfig, "unknown task '" + std::string(name) + "' (expected turn, next or timing)");
}

std::size_t LabeledDataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

Eigen::MatrixXd LabeledDataset::matrix() const {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(schema.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < schema.size(); ++j) X(i, j) = rows[i].values[j];
  }
  return X;
}

Eigen::VectorXd LabeledDataset::label_vector() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(i) = labels[i];
  return y;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.task = task;
  out.seed = seed;
  out.schema = schema;
  for (std::size_t i : indices) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

std::vector<LabeledSession> label_sessions(std::span<const SessionRecording> recordings, const LabelConfig& cfg,
                                           int jobs) {
  std::vector<LabeledSession> out(recordings.size());
  parallel_for(recordings.size(), jobs, [&](std::size_t i) {
    out[i].recording = &recordings[i];
    out[i].labels = label_session(recordings[i], cfg);
  });
  return out;
}

LabeledDataset build_turn_vs_continue(std::span<const LabeledSession> sessions, std::uint64_t seed,
                                      const DatasetConfig& cfg) {
  return build_with(Task::TurnVsContinue, sessions, seed, cfg, turn_vs_continue_candidates);
}

LabeledDataset build_next_speaker(std::span<const LabeledSession> sessions, std::uint64_t seed,
                                  const DatasetConfig& cfg) {
  for (const auto& s : sessions) {
    if (s.recording->manifest.users.size() < 3)
      fail(ErrorCode::GroupTooSmall, "next-speaker needs groups of at least 3");
  }
  return build_with(Task::NextSpeaker, sessions, seed, cfg, next_speaker_candidates);
}

LabeledDataset build_timing(std::span<const LabeledSession> sessions, std::uint64_t seed, const DatasetConfig& cfg) {
  return build_with(Task::Timing, sessions, seed, cfg, timing_candidates);
}

LabeledDataset build_dataset(Task task, std::span<const LabeledSession> sessions, std::uint64_t seed,
                             const DatasetConfig& cfg) {
  switch (task) {
    case Task::TurnVsContinue: return build_turn_vs_continue(sessions, seed, cfg);
    case Task::NextSpeaker: return build_next_speaker(sessions, seed, cfg);
    case Task::Timing: return build_timing(sessions, seed, cfg);
  }
  fail(ErrorCode::Internal, "unhandled task");
}

LabeledDataset build_dataset(Task task, std::span<const SessionRecording> recordings, std::uint64_t seed,
                             const DatasetConfig& cfg) {
  const auto sessions = label_sessions(recordings, cfg.labels, cfg.jobs);
  return build_dataset(task, sessions, seed, cfg);
}

void sort_rows(LabeledDataset& ds) {
  std::vector<std::size_t> order(ds.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = ds.rows[a].provenance;
    const auto& pb = ds.rows[b].provenance;
    return std::tie(pa.session_id, pa.onset, pa.main_user, ds.labels[a]) <
           std::tie(pb.session_id, pb.onset, pb.main_user, ds.labels[b]);
  });
  std::vector<FeatureVector> rows;
  std::vector<int> labels;
  rows.reserve(order.size());
  for (std::size_t i : order) {
    rows.push_back(std::move(ds.rows[i]));
    labels.push_back(ds.labels[i]);
  }
  ds.rows = std::move(rows);
  ds.labels = std::move(labels);
}

void balance_classes(LabeledDataset& ds, std::uint64_t seed) {
  sort_rows(ds);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) (ds.labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() == neg.size()) return;
  Rng rng(seed);
  auto& major = pos.size() > neg.size() ? pos : neg;
  const auto& minor = pos.size() > neg.size() ? neg : pos;
  std::vector<std::size_t> keep = minor;
  for (std::size_t k : rng.sample_without_replacement(major.size(), minor.size())) keep.push_back(major[k]);
  std::sort(keep.begin(), keep.end());
  LabeledDataset out = ds.subset(keep);
  out.candidate_positives = ds.candidate_positives;
  out.candidate_negatives = ds.candidate_negatives;
  out.skipped = ds.skipped;
  ds = std::move(out);
}

std::string dataset_to_csv(const LabeledDataset& ds, const std::string& config_hash) {
  nlohmann::ordered_json header;
  header["task"] = std::string(to_string(ds.task));
  header["seed"] = ds.seed;
  header["generator"] = std::string(kRngName);
  header["rows"] = ds.size();
  header["positives"] = ds.positives();
  header["negatives"] = ds.negatives();
  header["candidate_positives"] = ds.candidate_positives;
  header["candidate_negatives"] = ds.candidate_negatives;
  header["skipped"] = {{"invalid_window", ds.skipped.invalid_window},
                       {"no_reference", ds.skipped.no_reference},
                       {"intervening_speech", ds.skipped.intervening_speech},
                       {"duplicate", ds.skipped.duplicate}};
  header["schema_hash"] = ds.schema.hash();
  if (!config_hash.empty()) header["config_hash"] = config_hash;

  std::string out = "# " + header.dump() + "\n";
  for (std::size_t i = 0; i < kKeyColumns.size(); ++i) out += (i ? "," : "") + kKeyColumns[i];
  for (const auto& s : ds.schema.specs()) out += "," + s.name;
  out += '\n';
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    const auto& p = ds.rows[r].provenance;
    check_id(p.session_id);
    check_id(p.group_id);
    check_id(p.main_user);
    check_id(p.reference_user);
    out += p.session_id + ',' + p.group_id + ',' + std::to_string(p.week) + ',' + format_double(p.onset) + ',' +
           p.main_user + ',' + p.reference_user + ',' + std::to_string(ds.labels[r]);
    for (double v : ds.rows[r].values) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

LabeledDataset dataset_from_csv(std::string_view text, const FeatureSchema& schema) {
  LabeledDataset ds;
  ds.schema = schema;
  std::size_t pos = 0, line_no = 0;
  bool have_header = false, have_columns = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!have_header) {
      if (line.substr(0, 2) != "# ") fail(ErrorCode::MalformedInput, "dataset: missing '# {header}' line");
      try {
        const auto h = nlohmann::json::parse(line.substr(2));
        ds.task = parse_task(h.at("task").get<std::string>());
        ds.seed = h.at("seed").get<std::uint64_t>();
        ds.candidate_positives = h.value("candidate_positives", std::size_t{0});
        ds.candidate_negatives = h.value("candidate_negatives", std::size_t{0});
        if (h.contains("skipped")) {
          const auto& s = h["skipped"];
          ds.skipped = {s.value("invalid_window", std::size_t{0}), s.value("no_reference", std::size_t{0}),
                        s.value("intervening_speech", std::size_t{0}), s.value("duplicate", std::size_t{0})};
        }
        const std::string hash = h.at("schema_hash").get<std::string>();
        if (hash != schema.hash())
          fail(ErrorCode::SchemaMismatch, "dataset schema hash " + hash + " does not match schema " + schema.hash());
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedInput, std::string("dataset header: ") + e.what());
      }
      have_header = true;
      continue;
    }
    const auto cells = split_commas(line);
    if (!have_columns) {
      if (cells.size() != kKeyColumns.size() + schema.size())
        fail(ErrorCode::SchemaMismatch, "dataset has " + std::to_string(cells.size()) + " columns, schema expects " +
                                            std::to_string(kKeyColumns.size() + schema.size()));
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string& want = i < kKeyColumns.size() ? kKeyColumns[i] : schema[i - kKeyColumns.size()].name;
        if (cells[i] != want)
          fail(ErrorCode::SchemaMismatch, "dataset column '" + std::string(cells[i]) + "' where '" + want + "' expected");
      }
      have_columns = true;
      continue;
    }
    if (cells.size() != kKeyColumns.size() + schema.size())
      fail(ErrorCode::MalformedInput, "dataset line " + std::to_string(line_no) + ": wrong number of cells");
    FeatureVector fv;
    fv.provenance.session_id = std::string(cells[0]);
    fv.provenance.group_id = std::string(cells[1]);
    fv.provenance.week = static_cast<int>(parse_number(cells[2], line_no));
    fv.provenance.onset = parse_number(cells[3], line_no);
    fv.provenance.main_user = std::string(cells[4]);
    fv.provenance.reference_user = std::string(cells[5]);
    const double label = parse_number(cells[6], line_no);
    if (label != 0.0 && label != 1.0)
      fail(ErrorCode::MalformedInput, "dataset line " + std::to_string(line_no) + ": label must be 0 or 1");
    fv.values.reserve(schema.size());
    for (std::size_t i = kKeyColumns.size(); i < cells.size(); ++i) {
      const double v = parse_number(cells[i], line_no);
      if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "dataset line " + std::to_string(line_no));
      fv.values.push_back(v);
    }
    ds.rows.push_back(std::move(fv));
    ds.labels.push_back(static_cast<int>(label));
  }
  if (!have_columns) fail(ErrorCode::MalformedInput, "dataset: no column header");
  return ds;
}

std::filesystem::path schema_sidecar_path(const std::filesystem::path& dataset_path) {
  auto p = dataset_path;
  p += ".schema.json";
  return p;
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path, const std::string& config_hash) {
  write_text_file(path, dataset_to_csv(ds, config_hash));
  write_text_file(schema_sidecar_path(path), ds.schema.to_json());
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  const FeatureSchema schema = FeatureSchema::from_json(read_text_file(schema_sidecar_path(path)));
  return dataset_from_csv(read_text_file(path), schema);
}

}  // namespace vrturn
