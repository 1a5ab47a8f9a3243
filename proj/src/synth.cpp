#include "vrturn/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "vrturn/error.hpp"
#include "vrturn/geometry.hpp"
#include "vrturn/parallel.hpp"
#include "vrturn/rng.hpp"

namespace vrturn {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kDt = kFramePeriod;
constexpr int kCueFrames = 30;       // cues occupy the second before an onset
constexpr int kRaiseReturn = 60;     // frames to lower a raised head/hand after the onset
constexpr int kMinIpu = 12;
constexpr int kSmoothingClearance = 21;  // frames a user stays silent before a new turn
constexpr int kBackchannelClearance = 30;

int to_frames(double seconds) { return static_cast<int>(std::lround(seconds * kFrameRate)); }
double to_seconds(int frames) { return static_cast<double>(frames) / kFrameRate; }

// Damped stochastic oscillator: velocity is continuous, position reverts to 0.
struct SmoothWalk {
  double x = 0.0;
  double v = 0.0;

  void init(Rng& rng, double sd, double stiffness) {
    x = sd * rng.normal();
    v = sd * std::sqrt(stiffness) * rng.normal();
  }
  double step(Rng& rng, double sd, double damping, double stiffness) {
    const double sigma = sd * std::sqrt(2.0 * damping * stiffness);
    v += (-damping * v - stiffness * x) * kDt + sigma * std::sqrt(kDt) * rng.normal();
    x += v * kDt;
    return x;
  }
};

struct Ipu {
  int start = 0;
  int end = 0;
  std::size_t look_at = 0;
};

struct Turn {
  std::size_t speaker = 0;
  int start = 0;
  int end = 0;
  int clip_start = 0;  // where this speaker becomes main speaker
  std::vector<Ipu> ipus;
};

struct Script {
  std::vector<Turn> turns;
  struct Bc {
    std::size_t user;
    int start, end;
    std::size_t turn;
  };
  std::vector<Bc> backchannels;
  std::vector<ScriptedTransition> transitions;
  struct Onset {
    int frame;
    std::size_t upcoming;
    std::size_t previous;
  };
  std::vector<Onset> cue_onsets;
};

double yaw_towards(double fx, double fz, double tx, double tz) {
  return std::atan2(tx - fx, tz - fz) * 180.0 / std::numbers::pi;
}

std::size_t pick_weighted(Rng& rng, const std::vector<double>& w, std::size_t exclude) {
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i != exclude) total += w[i];
  }
  double u = rng.uniform01() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i == exclude) continue;
    last = i;
    if (u < w[i]) return i;
    u -= w[i];
  }
  return last;
}

bool clear_of(const std::vector<std::pair<int, int>>& spans, int start, int end, int clearance) {
  return std::all_of(spans.begin(), spans.end(),
                     [&](const auto& s) { return start >= s.second + clearance || end + clearance <= s.first; });
}

Script make_script(const SynthConfig& cfg, Rng& rng, int n_frames) {
  const auto& tc = cfg.turns;
  const std::size_t n = cfg.group_size;
  std::vector<double> weight(n);
  for (std::size_t u = 0; u < n; ++u) weight[u] = std::exp(cfg.cues.extraversion_weight * (cfg.traits[u].extraversion - 4.0));
  const auto& users = cfg.user_ids;

  Script s;
  std::vector<int> last_end(n, -1000000);
  std::size_t speaker = pick_weighted(rng, weight, n);
  int cursor = to_frames(rng.uniform(1.5, 3.0));
  int first_min = kMinIpu;
  int prev_end = -1;
  std::optional<TransitionCategory> category;
  std::size_t previous = n;

  for (;;) {
    Turn t;
    t.speaker = speaker;
    t.start = cursor;
    t.clip_start = std::max(cursor, prev_end);
    int length = to_frames(rng.uniform(tc.min_turn, tc.max_turn));
    int k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(std::max(1, tc.max_ipus))));
    std::vector<int> pauses;
    for (int i = 0; i + 1 < k; ++i) pauses.push_back(std::max(2, to_frames(rng.uniform(tc.micro_pause_min, tc.micro_pause_max))));
    auto speech_frames = [&] {
      int p = 0;
      for (int x : pauses) p += x;
      return length - p;
    };
    while (!pauses.empty() && speech_frames() < first_min + kMinIpu * static_cast<int>(pauses.size())) pauses.pop_back();
    if (speech_frames() < first_min) length += first_min - speech_frames();
    const int extra = speech_frames() - first_min - kMinIpu * static_cast<int>(pauses.size());
    std::vector<int> cuts;
    for (std::size_t i = 0; i < pauses.size(); ++i) cuts.push_back(static_cast<int>(rng.uniform_index(static_cast<std::size_t>(extra) + 1)));
    std::sort(cuts.begin(), cuts.end());
    int pos = t.start;
    int prev_cut = 0;
    for (std::size_t i = 0; i <= pauses.size(); ++i) {
      const int cut = i < cuts.size() ? cuts[i] : extra;
      const int len = (i == 0 ? first_min : kMinIpu) + cut - prev_cut;
      prev_cut = cut;
      std::size_t look = static_cast<std::size_t>(rng.uniform_index(n - 1));
      if (look >= speaker) ++look;
      t.ipus.push_back(Ipu{pos, pos + len, look});
      pos += len;
      if (i < pauses.size()) pos += pauses[i];
    }
    t.end = pos;
    if (t.end > n_frames - kCueFrames) break;

    if (category) {
      ScriptedTransition tr;
      tr.category = *category;
      tr.onset = to_seconds(t.start);
      tr.new_speaker_id = users[speaker];
      tr.previous_speaker_id = users[previous];
      tr.duration = to_seconds(t.end - t.start);
      s.transitions.push_back(tr);
      if (*category != TransitionCategory::ContinuingSpeech) s.cue_onsets.push_back({t.start, speaker, previous});
    }
    s.turns.push_back(t);
    last_end[speaker] = t.end;
    prev_end = t.end;
    previous = speaker;
    first_min = kMinIpu;

    if (rng.bernoulli(tc.p_continue)) {
      cursor = t.end + to_frames(rng.uniform(tc.continue_gap_min, tc.continue_gap_max));
      category = TransitionCategory::ContinuingSpeech;
      continue;
    }
    const std::size_t next = pick_weighted(rng, weight, speaker);
    const bool want_overlap = rng.bernoulli(tc.p_overlap);
    int overlap = to_frames(rng.uniform(tc.overlap_min, tc.overlap_max));
    const int clean_gap = to_frames(rng.uniform(tc.clean_gap_min, tc.clean_gap_max));
    overlap = std::min(overlap, t.end - t.clip_start - 15);
    if (want_overlap && overlap >= 6 && t.end - overlap >= last_end[next] + kSmoothingClearance) {
      cursor = t.end - overlap;
      first_min = overlap + 15;
      category = TransitionCategory::OverlapTurnTaking;
    } else {
      cursor = std::max(t.end + clean_gap, last_end[next] + kSmoothingClearance);
      category = TransitionCategory::CleanTurnTaking;
    }
    speaker = next;
  }

  // Backchannels sit inside one IPU of the main speaker, away from any
  // overlap with neighbouring turns and from the listener's own speech.
  std::vector<std::vector<std::pair<int, int>>> spans(n);
  for (const auto& t : s.turns)
    for (const auto& ip : t.ipus) spans[t.speaker].push_back({ip.start, ip.end});
  for (std::size_t ti = 0; ti < s.turns.size(); ++ti) {
    const Turn& t = s.turns[ti];
    if (!rng.bernoulli(tc.p_backchannel)) continue;
    std::size_t listener = static_cast<std::size_t>(rng.uniform_index(n - 1));
    if (listener >= t.speaker) ++listener;
    const int len = std::max(3, to_frames(rng.uniform(tc.backchannel_min, tc.backchannel_max)));
    const int hi_limit = ti + 1 < s.turns.size() ? std::min(t.end, s.turns[ti + 1].start) : t.end;
    const Ipu& ip = t.ipus[rng.uniform_index(t.ipus.size())];
    const int lo = std::max(ip.start, t.clip_start) + 4;
    const int hi = std::min(ip.end, hi_limit) - 4 - len;
    if (hi < lo) continue;
    const int start = lo + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(hi - lo) + 1));
    if (!clear_of(spans[listener], start, start + len, kBackchannelClearance)) continue;
    spans[listener].push_back({start, start + len});
    s.backchannels.push_back({listener, start, start + len, ti});
    ScriptedTransition tr;
    tr.category = TransitionCategory::Backchannel;
    tr.onset = to_seconds(start);
    tr.new_speaker_id = users[listener];
    tr.previous_speaker_id = users[t.speaker];
    tr.duration = to_seconds(len);
    tr.expect_filtered = tr.duration < LabelConfig{}.min_event_duration - kLabelEpsilon;
    s.transitions.push_back(tr);
  }
  std::stable_sort(s.transitions.begin(), s.transitions.end(),
                   [](const ScriptedTransition& a, const ScriptedTransition& b) { return a.onset < b.onset; });
  return s;
}

void add_raise(std::vector<double>& offset, int onset, double rate) {
  const int n = static_cast<int>(offset.size());
  for (int f = onset - kCueFrames; f < onset + kRaiseReturn && f < n; ++f) {
    if (f < 0) continue;
    const double peak = rate * 1.0;
    if (f < onset) {
      offset[f] += rate * to_seconds(f - (onset - kCueFrames));
    } else {
      offset[f] += peak * (1.0 - static_cast<double>(f - onset) / kRaiseReturn);
    }
  }
}

void add_nod(std::vector<double>& offset, int onset, double amplitude) {
  constexpr double kNodHz = 2.0;
  const double w = 2.0 * std::numbers::pi * kNodHz;
  for (int f = std::max(0, onset - kCueFrames); f < onset && f < static_cast<int>(offset.size()); ++f) {
    offset[f] += amplitude / w * std::sin(w * to_seconds(f - (onset - kCueFrames)));
  }
}

void check(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidConfig, "synth: " + what);
}

void read_turns(const json& j, TurnConfig& t) {
  t.min_turn = j.value("min_turn", t.min_turn);
  t.max_turn = j.value("max_turn", t.max_turn);
  t.max_ipus = j.value("max_ipus", t.max_ipus);
  t.micro_pause_min = j.value("micro_pause_min", t.micro_pause_min);
  t.micro_pause_max = j.value("micro_pause_max", t.micro_pause_max);
  t.p_continue = j.value("p_continue", t.p_continue);
  t.continue_gap_min = j.value("continue_gap_min", t.continue_gap_min);
  t.continue_gap_max = j.value("continue_gap_max", t.continue_gap_max);
  t.p_overlap = j.value("p_overlap", t.p_overlap);
  t.overlap_min = j.value("overlap_min", t.overlap_min);
  t.overlap_max = j.value("overlap_max", t.overlap_max);
  t.clean_gap_min = j.value("clean_gap_min", t.clean_gap_min);
  t.clean_gap_max = j.value("clean_gap_max", t.clean_gap_max);
  t.p_backchannel = j.value("p_backchannel", t.p_backchannel);
  t.backchannel_min = j.value("backchannel_min", t.backchannel_min);
  t.backchannel_max = j.value("backchannel_max", t.backchannel_max);
}

ordered_json write_turns(const TurnConfig& t) {
  return ordered_json{{"min_turn", t.min_turn},
                      {"max_turn", t.max_turn},
                      {"max_ipus", t.max_ipus},
                      {"micro_pause_min", t.micro_pause_min},
                      {"micro_pause_max", t.micro_pause_max},
                      {"p_continue", t.p_continue},
                      {"continue_gap_min", t.continue_gap_min},
                      {"continue_gap_max", t.continue_gap_max},
                      {"p_overlap", t.p_overlap},
                      {"overlap_min", t.overlap_min},
                      {"overlap_max", t.overlap_max},
                      {"clean_gap_min", t.clean_gap_min},
                      {"clean_gap_max", t.clean_gap_max},
                      {"p_backchannel", t.p_backchannel},
                      {"backchannel_min", t.backchannel_min},
                      {"backchannel_max", t.backchannel_max}};
}

void read_cues(const json& j, CueConfig& c) {
  c.head_raise = j.value("head_raise", c.head_raise);
  c.hand_raise = j.value("hand_raise", c.hand_raise);
  c.gaze_convergence = j.value("gaze_convergence", c.gaze_convergence);
  c.nod_amplitude = j.value("nod_amplitude", c.nod_amplitude);
  c.extraversion_weight = j.value("extraversion_weight", c.extraversion_weight);
  c.probability = j.value("probability", c.probability);
}

ordered_json write_cues(const CueConfig& c) {
  return ordered_json{{"head_raise", c.head_raise},
                      {"hand_raise", c.hand_raise},
                      {"gaze_convergence", c.gaze_convergence},
                      {"nod_amplitude", c.nod_amplitude},
                      {"extraversion_weight", c.extraversion_weight},
                      {"probability", c.probability}};
}

void read_noise(const json& j, MotionNoise& m) {
  m.position_sd = j.value("position_sd", m.position_sd);
  m.head_height_sd = j.value("head_height_sd", m.head_height_sd);
  m.hand_position_sd = j.value("hand_position_sd", m.hand_position_sd);
  m.angle_sd = j.value("angle_sd", m.angle_sd);
  m.hand_angle_sd = j.value("hand_angle_sd", m.hand_angle_sd);
  m.damping = j.value("damping", m.damping);
  m.stiffness = j.value("stiffness", m.stiffness);
  m.gaze_lag = j.value("gaze_lag", m.gaze_lag);
}

ordered_json write_noise(const MotionNoise& m) {
  return ordered_json{{"position_sd", m.position_sd}, {"head_height_sd", m.head_height_sd},
                      {"hand_position_sd", m.hand_position_sd}, {"angle_sd", m.angle_sd},
                      {"hand_angle_sd", m.hand_angle_sd}, {"damping", m.damping},
                      {"stiffness", m.stiffness}, {"gaze_lag", m.gaze_lag}};
}

Big5 sample_traits(Rng& rng) {
  auto half_step = [&] { return 1.0 + 0.5 * static_cast<double>(rng.uniform_index(13)); };
  Big5 b;
  b.openness = half_step();
  b.conscientiousness = half_step();
  b.extraversion = half_step();
  b.agreeableness = half_step();
  b.neuroticism = half_step();
  return b;
}

}  // namespace

CueConfig CueConfig::none() {
  CueConfig c;
  c.head_raise = 0.0;
  c.hand_raise = 0.0;
  c.gaze_convergence = 0.0;
  c.nod_amplitude = 0.0;
  c.extraversion_weight = 0.0;
  c.probability = 0.0;
  return c;
}

CueConfig CueConfig::large() {
  CueConfig c;
  c.head_raise *= 2.0;
  c.hand_raise *= 2.0;
  c.gaze_convergence *= 2.0;
  c.nod_amplitude *= 2.0;
  c.extraversion_weight *= 2.0;
  c.probability = 0.7;
  return c;
}

void SynthConfig::validate() const {
  check(group_size >= 3 && group_size <= 4, "group size must be 3 or 4");
  check(week >= 1 && week <= 4, "week must be 1..4");
  check(std::isfinite(duration) && duration >= 10.0, "duration must be at least 10 s");
  check(user_ids.empty() || user_ids.size() == group_size, "user_ids must match group size");
  check(traits.empty() || traits.size() == group_size, "traits must match group size");
  const auto& t = turns;
  check(t.min_turn >= 1.0 && t.max_turn >= t.min_turn, "turn length range");
  check(t.max_ipus >= 1, "max_ipus");
  check(t.micro_pause_min > 0.0 && t.micro_pause_max >= t.micro_pause_min && t.micro_pause_max < 0.5,
        "micro pauses must stay below the 0.5 s smoothing gap");
  check(t.continue_gap_min > 0.55 && t.continue_gap_max >= t.continue_gap_min, "continue gap must exceed 0.5 s");
  check(t.overlap_min > 0.0 && t.overlap_max >= t.overlap_min, "overlap range");
  check(t.clean_gap_min > 0.0 && t.clean_gap_max >= t.clean_gap_min, "clean gap range");
  check(t.backchannel_min > 0.0 && t.backchannel_max >= t.backchannel_min, "backchannel range");
  for (double p : {t.p_continue, t.p_overlap, t.p_backchannel, cues.probability})
    check(p >= 0.0 && p <= 1.0, "probabilities must lie in [0, 1]");
  for (double e : {cues.head_raise, cues.hand_raise, cues.gaze_convergence, cues.nod_amplitude,
                   cues.extraversion_weight})
    check(std::isfinite(e), "cue effect sizes must be finite");
  check(cues.gaze_convergence >= 0.0 && cues.gaze_convergence <= 90.0, "gaze convergence must be in [0, 90]");
  check(noise.damping > 0.0 && noise.stiffness > 0.0 && noise.gaze_lag > 0.0, "motion noise dynamics");
  for (double sd : {noise.position_sd, noise.head_height_sd, noise.hand_position_sd, noise.angle_sd,
                    noise.hand_angle_sd})
    check(sd >= 0.0 && std::isfinite(sd), "noise levels must be finite and non-negative");
  for (const auto& b : traits) {
    for (double v : {b.openness, b.conscientiousness, b.extraversion, b.agreeableness, b.neuroticism})
      check(v >= 1.0 && v <= 7.0, "traits must lie in [1, 7]");
  }
}

SynthSession generate_session(const SynthConfig& in) {
  in.validate();
  SynthConfig cfg = in;
  const std::size_t n = cfg.group_size;
  if (cfg.user_ids.empty()) {
    for (std::size_t u = 0; u < n; ++u) cfg.user_ids.push_back(cfg.group_id + "_u" + std::to_string(u + 1));
  }
  if (cfg.traits.empty()) {
    Rng trng(derive_seed(cfg.seed, "traits"));
    for (std::size_t u = 0; u < n; ++u) cfg.traits.push_back(sample_traits(trng));
  }
  const int n_frames = to_frames(cfg.duration);

  Rng script_rng(derive_seed(cfg.seed, "script"));
  const Script script = make_script(cfg, script_rng, n_frames);

  // Speaking mask and main speaker per frame.
  std::vector<std::vector<char>> speaking(n, std::vector<char>(static_cast<std::size_t>(n_frames), 0));
  for (const auto& t : script.turns)
    for (const auto& ip : t.ipus)
      for (int f = ip.start; f < ip.end; ++f) speaking[t.speaker][f] = 1;
  for (const auto& b : script.backchannels)
    for (int f = b.start; f < b.end; ++f) speaking[b.user][f] = 1;
  std::vector<std::size_t> main_of(static_cast<std::size_t>(n_frames), n);
  std::vector<std::size_t> look_of(static_cast<std::size_t>(n_frames), n);
  {
    std::size_t cur = script.turns.empty() ? 0 : script.turns.front().speaker;
    std::size_t look = script.turns.empty() ? 1 : script.turns.front().ipus.front().look_at;
    std::size_t ti = 0;
    for (int f = 0; f < n_frames; ++f) {
      while (ti < script.turns.size() && script.turns[ti].clip_start <= f) {
        cur = script.turns[ti].speaker;
        ++ti;
      }
      if (ti > 0) {
        for (const auto& ip : script.turns[ti - 1].ipus) {
          if (ip.start <= f) look = ip.look_at;
        }
      }
      main_of[f] = cur;
      look_of[f] = look;
    }
  }

  // Cue offsets.
  std::vector<std::vector<double>> head_y(n, std::vector<double>(n_frames, 0.0));
  std::vector<std::vector<double>> hand_y(n, std::vector<double>(n_frames, 0.0));
  std::vector<std::vector<double>> pitch(n, std::vector<double>(n_frames, 0.0));
  // gaze_to[u][f] = user u is nudged toward at frame f (n = none), with weight.
  std::vector<std::vector<std::size_t>> gaze_to(n, std::vector<std::size_t>(n_frames, n));
  std::vector<std::vector<double>> gaze_w(n, std::vector<double>(n_frames, 0.0));
  GroundTruth truth;
  truth.session_id = cfg.session_id;
  Rng cue_rng(derive_seed(cfg.seed, "cues"));
  const auto& cues = cfg.cues;
  for (const auto& o : script.cue_onsets) {
    const int from = o.frame - kCueFrames;
    const double t0 = to_seconds(from), t1 = to_seconds(o.frame);
    const std::string& uid = cfg.user_ids[o.upcoming];
    const bool head = cue_rng.bernoulli(cues.probability);
    const bool hand = cue_rng.bernoulli(cues.probability);
    const bool nod = cue_rng.bernoulli(cues.probability);
    const bool gaze = cue_rng.bernoulli(cues.probability);
    if (from < 0) continue;
    if (head && cues.head_raise != 0.0) {
      add_raise(head_y[o.upcoming], o.frame, cues.head_raise);
      truth.cues.push_back({uid, "head_raise", t0, t1});
    }
    if (hand && cues.hand_raise != 0.0) {
      add_raise(hand_y[o.upcoming], o.frame, cues.hand_raise);
      truth.cues.push_back({uid, "hand_raise", t0, t1});
    }
    if (nod && cues.nod_amplitude != 0.0) {
      add_nod(pitch[o.upcoming], o.frame, cues.nod_amplitude);
      truth.cues.push_back({uid, "nod", t0, t1});
    }
    if (gaze && cues.gaze_convergence != 0.0) {
      for (std::size_t l = 0; l < n; ++l) {
        if (l == o.upcoming || l == o.previous) continue;
        for (int f = from; f < o.frame; ++f) {
          gaze_to[l][f] = o.upcoming;
          gaze_w[l][f] = static_cast<double>(f - from + 1) / kCueFrames;
        }
        truth.cues.push_back({cfg.user_ids[l], "gaze", t0, t1});
      }
    }
  }

  // Seating: users on a circle facing its center.
  Rng seat_rng(derive_seed(cfg.seed, "seats"));
  const double base_angle = seat_rng.uniform(0.0, 360.0);
  std::vector<double> seat_x(n), seat_z(n), seat_yaw(n), height(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double a = (base_angle + 360.0 * static_cast<double>(u) / static_cast<double>(n) + seat_rng.uniform(-15.0, 15.0)) *
                     std::numbers::pi / 180.0;
    const double r = seat_rng.uniform(1.2, 1.8);
    seat_x[u] = r * std::sin(a);
    seat_z[u] = r * std::cos(a);
    seat_yaw[u] = yaw_towards(seat_x[u], seat_z[u], 0.0, 0.0);
    height[u] = seat_rng.uniform(1.55, 1.75);
  }

  const auto& nz = cfg.noise;
  SessionManifest manifest;
  manifest.session_id = cfg.session_id;
  manifest.group_id = cfg.group_id;
  manifest.week = cfg.week;
  for (std::size_t u = 0; u < n; ++u) manifest.users.push_back({cfg.user_ids[u], cfg.traits[u]});

  std::vector<UserFrame> frames;
  frames.reserve(static_cast<std::size_t>(n_frames) * n);
  for (std::size_t u = 0; u < n; ++u) {
    Rng rng(derive_seed(cfg.seed, "motion", u));
    Rng vol_rng(derive_seed(cfg.seed, "volume", u));
    // 0-1 root x/z, 2 root yaw, 3-5 head xyz, 6-8 head roll/pitch/yaw,
    // 9-11 left xyz, 12-14 left rpy, 15-17 right xyz, 18-20 right rpy
    std::array<SmoothWalk, 21> walk;
    std::array<double, 21> sd{};
    sd[0] = sd[1] = nz.position_sd;
    sd[2] = 0.3 * nz.angle_sd;
    sd[3] = sd[5] = nz.position_sd;
    sd[4] = nz.head_height_sd;
    sd[6] = sd[7] = sd[8] = nz.angle_sd;
    for (int k = 9; k < 21; ++k) sd[k] = ((k - 9) % 6 < 3) ? nz.hand_position_sd : nz.hand_angle_sd;
    for (int k = 0; k < 21; ++k) walk[k].init(rng, sd[k], nz.stiffness);

    auto target_yaw = [&](int f) {
      const std::size_t m = main_of[f];
      const std::size_t who = (m == u || m == n) ? look_of[f] : m;
      double yaw = yaw_towards(seat_x[u], seat_z[u], seat_x[who], seat_z[who]);
      if (gaze_to[u][f] < n) {
        const std::size_t g = gaze_to[u][f];
        const double toward = yaw_towards(seat_x[u], seat_z[u], seat_x[g], seat_z[g]);
        const double delta = std::clamp(shortest_angle_diff(yaw, toward), -cues.gaze_convergence, cues.gaze_convergence);
        yaw += gaze_w[u][f] * delta;
      }
      return yaw;
    };
    double gaze_yaw = target_yaw(0);

    for (int f = 0; f < n_frames; ++f) {
      std::array<double, 21> v{};
      for (int k = 0; k < 21; ++k) v[k] = f == 0 ? walk[k].x : walk[k].step(rng, sd[k], nz.damping, nz.stiffness);
      gaze_yaw = wrap_degrees(gaze_yaw + shortest_angle_diff(gaze_yaw, target_yaw(f)) * std::min(1.0, kDt / nz.gaze_lag));

      UserFrame fr;
      fr.timestamp = static_cast<double>(f) / kFrameRate;
      fr.user_id = cfg.user_ids[u];
      fr.root = DevicePose{seat_x[u] + v[0], 0.0, seat_z[u] + v[1], 0.0, 0.0, wrap_degrees(seat_yaw[u] + v[2])};
      fr.head = DevicePose{v[3], height[u] + v[4] + head_y[u][f], v[5], wrap_degrees(v[6]),
                           std::clamp(v[7] + pitch[u][f], -89.0, 89.0), wrap_degrees(gaze_yaw + v[8] - fr.root.yaw)};
      fr.left_hand = DevicePose{-0.2 + v[9], 1.0 + v[10] + hand_y[u][f], 0.25 + v[11], wrap_degrees(v[12]),
                                std::clamp(v[13], -89.0, 89.0), wrap_degrees(v[14])};
      fr.right_hand = DevicePose{0.2 + v[15], 1.0 + v[16], 0.25 + v[17], wrap_degrees(v[18]),
                                 std::clamp(v[19], -89.0, 89.0), wrap_degrees(v[20])};
      fr.volume = speaking[u][f] ? vol_rng.uniform(0.3, 0.8) : vol_rng.uniform(0.0, 0.05);
      frames.push_back(std::move(fr));
    }
  }

  for (const auto& t : script.turns)
    for (const auto& ip : t.ipus)
      truth.speech.push_back({cfg.user_ids[t.speaker], to_seconds(ip.start), to_seconds(ip.end), false});
  for (const auto& b : script.backchannels)
    truth.speech.push_back({cfg.user_ids[b.user], to_seconds(b.start), to_seconds(b.end), true});
  std::stable_sort(truth.speech.begin(), truth.speech.end(),
                   [](const ScriptedSpeech& a, const ScriptedSpeech& b) { return a.start < b.start; });
  truth.transitions = script.transitions;

  SynthSession out;
  out.recording = assemble_recording(std::move(manifest), std::move(frames));
  out.truth = std::move(truth);
  return out;
}

std::vector<SynthConfig> corpus_session_configs(const CorpusConfig& cfg) {
  if (cfg.groups == 0 || cfg.sessions_per_group == 0) fail(ErrorCode::InvalidConfig, "synth: empty corpus");
  if (cfg.sessions_per_group > 4) fail(ErrorCode::InvalidConfig, "synth: at most 4 sessions (weeks) per group");
  std::vector<SynthConfig> out;
  for (std::size_t g = 0; g < cfg.groups; ++g) {
    SynthConfig base;
    char gid[16];
    std::snprintf(gid, sizeof gid, "g%02zu", g + 1);
    base.group_id = gid;
    base.group_size = (g / 2) % 2 == 0 ? 4 : 3;
    base.duration = cfg.duration;
    base.turns = cfg.turns;
    base.cues = cfg.cues;
    base.noise = cfg.noise;
    Rng trng(derive_seed(cfg.seed, "group-traits", g));
    for (std::size_t u = 0; u < base.group_size; ++u) {
      base.user_ids.push_back(base.group_id + "_u" + std::to_string(u + 1));
      base.traits.push_back(sample_traits(trng));
    }
    for (std::size_t s = 0; s < cfg.sessions_per_group; ++s) {
      SynthConfig c = base;
      // Even groups meet in weeks 1, 3, 2, 4; odd groups in 2, 4, 1, 3.
      static constexpr int kEven[4] = {1, 3, 2, 4};
      static constexpr int kOdd[4] = {2, 4, 1, 3};
      c.week = g % 2 == 0 ? kEven[s] : kOdd[s];
      c.session_id = base.group_id + "_w" + std::to_string(c.week);
      c.seed = derive_seed(cfg.seed, "session:" + c.session_id);
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<SynthSession> generate_corpus(const CorpusConfig& cfg, int jobs) {
  const auto configs = corpus_session_configs(cfg);
  std::vector<SynthSession> out(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) { out[i] = generate_session(configs[i]); });
  std::sort(out.begin(), out.end(), [](const SynthSession& a, const SynthSession& b) {
    return a.recording.manifest.session_id < b.recording.manifest.session_id;
  });
  return out;
}

std::string CorpusConfig::to_json() const {
  ordered_json j;
  j["groups"] = groups;
  j["sessions_per_group"] = sessions_per_group;
  j["duration"] = duration;
  j["seed"] = seed;
  j["turns"] = write_turns(turns);
  j["cues"] = write_cues(cues);
  j["noise"] = write_noise(noise);
  return j.dump(2) + "\n";
}

CorpusConfig CorpusConfig::from_json(std::string_view text) {
  CorpusConfig c;
  try {
    const json j = json::parse(text);
    c.groups = j.value("groups", c.groups);
    c.sessions_per_group = j.value("sessions_per_group", c.sessions_per_group);
    c.duration = j.value("duration", c.duration);
    c.seed = j.value("seed", c.seed);
    if (j.contains("turns")) read_turns(j["turns"], c.turns);
    if (j.contains("cues")) {
      if (j["cues"].is_string()) {
        const auto level = j["cues"].get<std::string>();
        if (level == "none") c.cues = CueConfig::none();
        else if (level == "medium") c.cues = CueConfig::medium();
        else if (level == "large") c.cues = CueConfig::large();
        else fail(ErrorCode::InvalidConfig, "synth: unknown cue level '" + level + "'");
      } else {
        read_cues(j["cues"], c.cues);
      }
    }
    if (j.contains("noise")) read_noise(j["noise"], c.noise);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("synth config: ") + e.what());
  }
  return c;
}

std::filesystem::path truth_path(const std::filesystem::path& dir, const std::string& session_id) {
  return dir / (session_id + ".truth.json");
}

std::string GroundTruth::to_json() const {
  ordered_json j;
  j["session_id"] = session_id;
  j["speech"] = ordered_json::array();
  for (const auto& s : speech)
    j["speech"].push_back(ordered_json{{"user", s.user_id}, {"start", s.start}, {"end", s.end}, {"backchannel", s.backchannel}});
  j["transitions"] = ordered_json::array();
  for (const auto& t : transitions) {
    j["transitions"].push_back(ordered_json{{"category", std::string(vrturn::to_string(t.category))},
                                            {"onset", t.onset},
                                            {"new_speaker", t.new_speaker_id},
                                            {"prev_speaker", t.previous_speaker_id},
                                            {"duration", t.duration},
                                            {"expect_filtered", t.expect_filtered}});
  }
  j["cues"] = ordered_json::array();
  for (const auto& c : cues)
    j["cues"].push_back(ordered_json{{"user", c.user_id}, {"cue", c.cue}, {"start", c.start}, {"end", c.end}});
  return j.dump(2) + "\n";
}

GroundTruth GroundTruth::from_json(std::string_view text) {
  GroundTruth g;
  try {
    const json j = json::parse(text);
    g.session_id = j.at("session_id").get<std::string>();
    for (const auto& s : j.at("speech"))
      g.speech.push_back({s.at("user").get<std::string>(), s.at("start").get<double>(), s.at("end").get<double>(),
                          s.at("backchannel").get<bool>()});
    for (const auto& t : j.at("transitions")) {
      ScriptedTransition tr;
      tr.category = parse_transition_category(t.at("category").get<std::string>());
      tr.onset = t.at("onset").get<double>();
      tr.new_speaker_id = t.at("new_speaker").get<std::string>();
      tr.previous_speaker_id = t.at("prev_speaker").get<std::string>();
      tr.duration = t.at("duration").get<double>();
      tr.expect_filtered = t.at("expect_filtered").get<bool>();
      g.transitions.push_back(tr);
    }
    for (const auto& c : j.at("cues"))
      g.cues.push_back({c.at("user").get<std::string>(), c.at("cue").get<std::string>(), c.at("start").get<double>(),
                        c.at("end").get<double>()});
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedInput, std::string("ground truth: ") + e.what());
  }
  return g;
}

LabelingScore verify_labeling(const SessionRecording& rec, const GroundTruth& truth, const LabelConfig& cfg) {
  const SessionLabels labels = label_session(rec, cfg);
  LabelingScore score;
  std::vector<bool> used(labels.transitions.size(), false);
  constexpr double kOneFrame = kFramePeriod + 1e-9;
  double error_sum = 0.0;
  for (const auto& exp : truth.transitions) {
    std::size_t best = labels.transitions.size();
    double best_err = kOneFrame;
    for (std::size_t i = 0; i < labels.transitions.size(); ++i) {
      const auto& got = labels.transitions[i];
      if (used[i] || got.new_speaker_id != exp.new_speaker_id) continue;
      const double err = std::abs(got.onset - exp.onset);
      if (err <= best_err) {
        if (best == labels.transitions.size() || err < best_err) best = i;
        best_err = std::min(best_err, err);
      }
    }
    if (exp.expect_filtered) {
      ++score.expected_filtered;
      if (best == labels.transitions.size()) ++score.filtered_ok;
      else used[best] = true;
      continue;
    }
    ++score.expected;
    const std::string want(to_string(exp.category));
    if (best == labels.transitions.size()) {
      ++score.confusion[want]["none"];
      continue;
    }
    used[best] = true;
    const auto& got = labels.transitions[best];
    ++score.confusion[want][std::string(to_string(got.category))];
    if (got.category == exp.category && got.previous_speaker_id == exp.previous_speaker_id) ++score.recovered;
    score.max_onset_error = std::max(score.max_onset_error, best_err);
    error_sum += best_err;
  }
  const std::size_t matched = score.expected - (score.confusion.empty() ? 0 : [&] {
    std::size_t none = 0;
    for (const auto& [k, row] : score.confusion) {
      auto it = row.find("none");
      if (it != row.end()) none += it->second;
    }
    return none;
  }());
  score.mean_onset_error = matched ? error_sum / static_cast<double>(matched) : 0.0;
  score.spurious = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
  return score;
}

std::string LabelingScore::to_json() const {
  ordered_json j;
  j["expected"] = expected;
  j["recovered"] = recovered;
  j["spurious"] = spurious;
  j["expected_filtered"] = expected_filtered;
  j["filtered_ok"] = filtered_ok;
  j["max_onset_error"] = max_onset_error;
  j["mean_onset_error"] = mean_onset_error;
  ordered_json conf = ordered_json::object();
  for (const auto& [k, row] : confusion) {
    ordered_json r = ordered_json::object();
    for (const auto& [c, v] : row) r[c] = v;
    conf[k] = r;
  }
  j["confusion"] = conf;
  return j.dump(2) + "\n";
}

}  // namespace vrturn
