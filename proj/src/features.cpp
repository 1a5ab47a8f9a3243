#include "vrturn/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "vrturn/error.hpp"
#include "vrturn/geometry.hpp"
#include "vrturn/numeric_format.hpp"

namespace vrturn {

std::string_view to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Speech: return "speech";
    case FeatureGroup::Traits: return "traits";
    case FeatureGroup::Egocentric: return "egocentric";
    case FeatureGroup::Dyadic: return "dyadic";
    case FeatureGroup::GroupRelation: return "group_rel";
  }
  return "?";
}

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Continuous: return "continuous";
    case FeatureKind::Binary: return "binary";
    case FeatureKind::OneHot: return "onehot";
  }
  return "?";
}

FeatureGroup parse_feature_group(std::string_view s) {
  for (auto g : {FeatureGroup::Speech, FeatureGroup::Traits, FeatureGroup::Egocentric, FeatureGroup::Dyadic,
                 FeatureGroup::GroupRelation}) {
    if (to_string(g) == s) return g;
  }
  fail(ErrorCode::MalformedInput, "unknown feature group '" + std::string(s) + "'");
}

FeatureKind parse_feature_kind(std::string_view s) {
  for (auto k : {FeatureKind::Continuous, FeatureKind::Binary, FeatureKind::OneHot}) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::MalformedInput, "unknown feature kind '" + std::string(s) + "'");
}

bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> specs) : specs_(std::move(specs)) {
  std::string canonical;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    if (!index_.emplace(s.name, i).second) fail(ErrorCode::InvalidConfig, "duplicate feature name " + s.name);
    canonical += s.name;
    canonical += '|';
    canonical += to_string(s.group);
    canonical += '|';
    canonical += to_string(s.kind);
    canonical += '\n';
  }
  hash_ = to_hex(fnv1a64(canonical));
}

FeatureSchema FeatureSchema::continuous(std::size_t n, std::string_view prefix) {
  std::vector<FeatureSpec> specs;
  for (std::size_t i = 0; i < n; ++i)
    specs.push_back({std::string(prefix) + std::to_string(i), FeatureGroup::Egocentric, FeatureKind::Continuous});
  return FeatureSchema(std::move(specs));
}

std::optional<std::size_t> FeatureSchema::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
  auto idx = find(name);
  if (!idx) fail(ErrorCode::InvalidConfig, "unknown feature '" + std::string(name) + "'");
  return *idx;
}

std::vector<std::size_t> FeatureSchema::match(std::string_view pattern) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (glob_match(pattern, specs_[i].name)) out.push_back(i);
  }
  return out;
}

std::string FeatureSchema::to_json() const {
  nlohmann::ordered_json doc;
  doc["schema_hash"] = hash_;
  doc["features"] = nlohmann::ordered_json::array();
  for (const auto& s : specs_) {
    nlohmann::ordered_json j;
    j["name"] = s.name;
    j["group"] = std::string(to_string(s.group));
    j["kind"] = std::string(to_string(s.kind));
    doc["features"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

FeatureSchema FeatureSchema::from_json(std::string_view text) {
  std::vector<FeatureSpec> specs;
  std::string declared;
  try {
    const auto doc = nlohmann::json::parse(text);
    declared = doc.value("schema_hash", std::string());
    for (const auto& j : doc.at("features")) {
      specs.push_back({j.at("name").get<std::string>(), parse_feature_group(j.at("group").get<std::string>()),
                       parse_feature_kind(j.at("kind").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedInput, std::string("schema: ") + e.what());
  }
  FeatureSchema schema(std::move(specs));
  if (!declared.empty() && declared != schema.hash())
    fail(ErrorCode::SchemaMismatch, "schema document hash " + declared + " does not match its columns");
  return schema;
}

namespace {

constexpr std::array<const char*, 3> kStatNames = {"min", "max", "mean"};
constexpr std::array<const char*, 2> kMeasNames = {"raw", "vel"};
constexpr std::array<const char*, 3> kDeviceNames = {"head", "lh", "rh"};
constexpr std::array<const char*, 6> kDofNames = {"x", "y", "z", "roll", "pitch", "yaw"};
constexpr std::array<const char*, 5> kTraitNames = {"openness", "conscientiousness", "extraversion",
                                                    "agreeableness", "neuroticism"};
constexpr std::array<const char*, 4> kSymbolNames = {"u", "a", "b", "c"};
constexpr std::array<const char*, 6> kDyadicMeasures = {"gaze_main_to_ref", "gaze_ref_to_main", "ipd",
                                                        "vss1", "vss5", "vss10"};
constexpr std::array<const char*, 6> kGroupMeasures = {"gaze_to_others", "gaze_from_others", "ipd",
                                                       "vss1", "vss5", "vss10"};

void add_stat_block(std::vector<FeatureSpec>& specs, const std::string& prefix, FeatureGroup g) {
  for (const char* meas : kMeasNames)
    for (const char* stat : kStatNames)
      specs.push_back({prefix + "." + meas + "." + stat, g, FeatureKind::Continuous});
}

FeatureSchema build_turn_taking_schema() {
  std::vector<FeatureSpec> specs;
  for (std::size_t i = 1; i <= kSpeechSequenceLength; ++i)
    for (const char* sym : kSymbolNames)
      specs.push_back({"speech.seq." + std::to_string(i) + "." + sym, FeatureGroup::Speech, FeatureKind::OneHot});
  specs.push_back({"speech.main.turns_since_last", FeatureGroup::Speech, FeatureKind::Continuous});
  specs.push_back({"speech.main.time_since_last", FeatureGroup::Speech, FeatureKind::Continuous});
  specs.push_back({"speech.main.has_spoken", FeatureGroup::Speech, FeatureKind::Binary});

  for (const char* who : {"main", "ref", "group_mean"})
    for (const char* trait : kTraitNames)
      specs.push_back({std::string("traits.") + who + "." + trait, FeatureGroup::Traits, FeatureKind::Continuous});
  specs.push_back({"traits.group_size", FeatureGroup::Traits, FeatureKind::Continuous});

  for (const char* who : {"main", "ref"})
    for (const char* dev : kDeviceNames)
      for (const char* dof : kDofNames)
        add_stat_block(specs, std::string("ego.") + who + "." + dev + "." + dof, FeatureGroup::Egocentric);

  for (const char* m : kDyadicMeasures) add_stat_block(specs, std::string("dyad.") + m, FeatureGroup::Dyadic);

  for (const char* who : {"main", "ref"})
    for (const char* m : kGroupMeasures)
      add_stat_block(specs, std::string("group.") + who + "." + m, FeatureGroup::GroupRelation);
  return FeatureSchema(std::move(specs));
}

double dof_value(const DevicePose& p, std::size_t dof) {
  switch (dof) {
    case 0: return p.x;
    case 1: return p.y;
    case 2: return p.z;
    case 3: return p.roll;
    case 4: return p.pitch;
    default: return p.yaw;
  }
}

void append_stats(std::vector<double>& out, std::span<const double> series) {
  const SeriesStats s = summarize(series);
  out.push_back(s.min);
  out.push_back(s.max);
  out.push_back(s.mean);
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Per-frame relationship measures between two users over their shared frames.
struct PairSeries {
  std::vector<double> t;
  std::vector<double> gaze_ab;
  std::vector<double> gaze_ba;
  std::vector<double> ipd;
  std::array<std::vector<double>, 3> vss;

  // Measure index follows kDyadicMeasures with a as main, b as ref.
  const std::vector<double>& measure(std::size_t m) const {
    switch (m) {
      case 0: return gaze_ab;
      case 1: return gaze_ba;
      case 2: return ipd;
      default: return vss[m - 3];
    }
  }
};

PairSeries pair_series(const UserSlice& a, const UserSlice& b, const FeatureConfig& cfg) {
  PairSeries s;
  std::size_t i = 0, j = 0;
  while (i < a.frames.size() && j < b.frames.size()) {
    const double ta = a.frames[i].timestamp;
    const double tb = b.frames[j].timestamp;
    if (ta < tb - kTimeEpsilon) {
      ++i;
    } else if (tb < ta - kTimeEpsilon) {
      ++j;
    } else {
      const DevicePose ha = compose_pose(a.frames[i].root, a.frames[i].head);
      const DevicePose hb = compose_pose(b.frames[j].root, b.frames[j].head);
      s.t.push_back(ta);
      s.gaze_ab.push_back(direct_gaze_angle(ha, hb));
      s.gaze_ba.push_back(direct_gaze_angle(hb, ha));
      s.ipd.push_back(interpersonal_distance(ha, hb));
      for (std::size_t k = 0; k < 3; ++k) s.vss[k].push_back(visual_shared_space(ha, hb, cfg.shared_space_lengths[k]));
      ++i;
      ++j;
    }
  }
  if (s.t.size() < 2)
    fail(ErrorCode::WindowTooSparse, "users " + a.user_id + " and " + b.user_id + " share < 2 frames in window");
  return s;
}

}  // namespace

const FeatureSchema& turn_taking_schema() {
  static const FeatureSchema schema = build_turn_taking_schema();
  return schema;
}

SeriesStats summarize(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::WindowTooSparse, "cannot summarize an empty series");
  SeriesStats s{values[0], values[0], 0.0};
  double sum = 0.0;
  for (double v : values) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

std::vector<std::string> turns_before(const MainSpeakerTimeline& timeline, double t) {
  std::vector<std::string> turns;
  for (auto it = timeline.segments.rbegin(); it != timeline.segments.rend(); ++it) {
    if (!(it->start < t)) continue;
    if (turns.empty() || turns.back() != it->speaker_id) turns.push_back(it->speaker_id);
  }
  return turns;
}

std::array<TurnSymbol, kSpeechSequenceLength> speech_sequence_symbols(const MainSpeakerTimeline& timeline,
                                                                      std::string_view main_user, double t) {
  std::array<TurnSymbol, kSpeechSequenceLength> symbols;
  symbols.fill(TurnSymbol::NA);
  const auto turns = turns_before(timeline, t);
  std::vector<std::string> others;
  for (std::size_t i = 0; i < turns.size() && i < kSpeechSequenceLength; ++i) {
    if (turns[i] == main_user) {
      symbols[i] = TurnSymbol::U;
      continue;
    }
    auto it = std::find(others.begin(), others.end(), turns[i]);
    std::size_t slot = static_cast<std::size_t>(it - others.begin());
    if (it == others.end()) {
      others.push_back(turns[i]);
      slot = others.size() - 1;
    }
    if (slot > 2) fail(ErrorCode::Internal, "more than three non-main speakers in a turn sequence");
    symbols[i] = static_cast<TurnSymbol>(slot + 1);
  }
  return symbols;
}

std::vector<double> speech_sequence_features(const MainSpeakerTimeline& timeline, std::string_view main_user,
                                             double t) {
  std::vector<double> out(kSpeechSequenceLength * 4, 0.0);
  const auto symbols = speech_sequence_symbols(timeline, main_user, t);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] != TurnSymbol::NA) out[i * 4 + static_cast<std::size_t>(symbols[i])] = 1.0;
  }
  return out;
}

SpeechRecency speech_recency_features(const MainSpeakerTimeline& timeline, std::string_view main_user, double t,
                                      double session_start) {
  SpeechRecency r;
  std::size_t turn_index = 0;
  std::string last_speaker;
  for (auto it = timeline.segments.rbegin(); it != timeline.segments.rend(); ++it) {
    if (!(it->start < t)) continue;
    if (turn_index == 0 || it->speaker_id != last_speaker) {
      ++turn_index;
      last_speaker = it->speaker_id;
    }
    if (it->speaker_id == main_user) {
      r.has_spoken = true;
      r.turns_since_last_speech = static_cast<double>(turn_index);
      r.time_since_last_speech_end = std::max(0.0, t - it->end);
      return r;
    }
  }
  r.turns_since_last_speech = static_cast<double>(turn_index + 1);
  r.time_since_last_speech_end = std::max(0.0, t - session_start);
  return r;
}

std::array<double, 16> trait_features(const SessionManifest& manifest, std::string_view main_user,
                                      std::string_view ref_user) {
  const Big5& m = manifest.user(main_user).big5;
  const Big5& r = manifest.user(ref_user).big5;
  Big5 g{0, 0, 0, 0, 0};
  for (const auto& u : manifest.users) {
    g.openness += u.big5.openness;
    g.conscientiousness += u.big5.conscientiousness;
    g.extraversion += u.big5.extraversion;
    g.agreeableness += u.big5.agreeableness;
    g.neuroticism += u.big5.neuroticism;
  }
  const double n = static_cast<double>(manifest.users.size());
  return {m.openness,       m.conscientiousness,       m.extraversion,       m.agreeableness,       m.neuroticism,
          r.openness,       r.conscientiousness,       r.extraversion,       r.agreeableness,       r.neuroticism,
          g.openness / n,   g.conscientiousness / n,   g.extraversion / n,   g.agreeableness / n,   g.neuroticism / n,
          n};
}

std::vector<double> egocentric_features(const FrameWindow& window, std::string_view user_id) {
  const auto frames = window.user(user_id).frames;
  const BodySpaceWindow centered = body_space_transform(frames, true);
  const BodySpaceWindow moving = body_space_transform(frames, false);
  std::vector<double> world_yaw;
  world_yaw.reserve(frames.size());
  for (const auto& f : frames) world_yaw.push_back(compose_pose(f.root, f.head).yaw);

  std::vector<double> out;
  out.reserve(kEgocentricPerUser);
  std::vector<double> raw(frames.size());
  std::vector<double> pose(frames.size());
  for (Device d : kTrackedDevices) {
    for (std::size_t dof = 0; dof < kDofNames.size(); ++dof) {
      for (std::size_t i = 0; i < frames.size(); ++i) {
        raw[i] = dof_value(centered[d][i], dof);
        pose[i] = dof_value(moving[d][i], dof);
      }
      append_stats(out, raw);
      const bool is_yaw = dof == 5;
      std::vector<double> vel;
      if (is_yaw && d == Device::Head) {
        vel = yaw_velocity_series(moving.timestamps, world_yaw);
      } else if (is_yaw) {
        vel = yaw_velocity_series(moving.timestamps, pose);
      } else {
        vel = velocity_series(moving.timestamps, pose);
      }
      append_stats(out, vel);
    }
  }
  return out;
}

std::vector<double> dyadic_features(const FrameWindow& window, std::string_view main_user,
                                    std::string_view ref_user, const FeatureConfig& cfg) {
  const PairSeries s = pair_series(window.user(main_user), window.user(ref_user), cfg);
  std::vector<double> out;
  out.reserve(kDyadicCount);
  for (std::size_t m = 0; m < kDyadicMeasures.size(); ++m) {
    const auto& series = s.measure(m);
    append_stats(out, series);
    append_stats(out, velocity_series(s.t, series));
  }
  return out;
}

std::vector<double> group_relationship_features(const FrameWindow& window, std::string_view main_user,
                                                std::string_view ref_user, const FeatureConfig& cfg) {
  std::vector<double> out;
  out.reserve(kGroupRelationCount);
  for (std::string_view focus : {main_user, ref_user}) {
    const UserSlice& me = window.user(focus);
    // Per remaining member: window means of raw and velocity for each measure.
    std::array<std::vector<double>, 6> raw_means;
    std::array<std::vector<double>, 6> vel_means;
    for (const auto& other : window.users) {
      if (other.user_id == focus) continue;
      const PairSeries s = pair_series(me, other, cfg);
      for (std::size_t m = 0; m < kGroupMeasures.size(); ++m) {
        const auto& series = s.measure(m);  // m=0: focus->other, m=1: other->focus
        raw_means[m].push_back(mean_of(series));
        vel_means[m].push_back(mean_of(velocity_series(s.t, series)));
      }
    }
    if (raw_means[0].empty()) fail(ErrorCode::WindowTooSparse, "no remaining members in window");
    for (std::size_t m = 0; m < kGroupMeasures.size(); ++m) {
      append_stats(out, raw_means[m]);
      append_stats(out, vel_means[m]);
    }
  }
  return out;
}

FeatureVector extract_sample(const SessionRecording& rec, const MainSpeakerTimeline& timeline, double t,
                             std::string_view main_user, std::string_view ref_user, const FeatureConfig& cfg) {
  if (main_user == ref_user) fail(ErrorCode::InvalidConfig, "main and reference user must differ");
  const auto& manifest = rec.manifest;
  manifest.index_of(main_user);
  manifest.index_of(ref_user);
  const FrameWindow window = slice_window(rec, t - cfg.window, cfg.window);

  FeatureVector fv;
  fv.provenance = Provenance{manifest.session_id, manifest.group_id, manifest.week, t,
                             std::string(main_user), std::string(ref_user)};
  auto& v = fv.values;
  v.reserve(turn_taking_schema().size());
  const auto seq = speech_sequence_features(timeline, main_user, t);
  v.insert(v.end(), seq.begin(), seq.end());
  const SpeechRecency rec_feat = speech_recency_features(timeline, main_user, t, rec.start_time());
  v.push_back(rec_feat.turns_since_last_speech);
  v.push_back(rec_feat.time_since_last_speech_end);
  v.push_back(rec_feat.has_spoken ? 1.0 : 0.0);
  const auto traits = trait_features(manifest, main_user, ref_user);
  v.insert(v.end(), traits.begin(), traits.end());
  for (std::string_view who : {main_user, ref_user}) {
    const auto ego = egocentric_features(window, who);
    v.insert(v.end(), ego.begin(), ego.end());
  }
  const auto dyad = dyadic_features(window, main_user, ref_user, cfg);
  v.insert(v.end(), dyad.begin(), dyad.end());
  const auto group = group_relationship_features(window, main_user, ref_user, cfg);
  v.insert(v.end(), group.begin(), group.end());

  if (v.size() != turn_taking_schema().size()) fail(ErrorCode::Internal, "feature row width mismatch");
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorCode::NonFiniteInput, "non-finite feature value");
  }
  return fv;
}

}  // namespace vrturn
