#include "vrturn/speech.hpp"

#include <algorithm>
#include <tuple>

#include <json.hpp>

#include "vrturn/error.hpp"

namespace vrturn {

namespace {

bool by_start_then_user(const SpeechEvent& a, const SpeechEvent& b) {
  return std::tie(a.start, a.end, a.user_id) < std::tie(b.start, b.end, b.user_id);
}

// e lies inside o. Identical intervals count as contained only in the
// higher user id so exactly one of the pair survives.
bool contained_in(const SpeechEvent& e, const SpeechEvent& o) {
  if (!(o.start <= e.start && e.end <= o.end)) return false;
  if (o.start < e.start || e.end < o.end) return true;
  return o.user_id < e.user_id;
}

}  // namespace

const MainSegment* MainSpeakerTimeline::at(double t) const {
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const MainSegment& s) { return v < s.start; });
  if (it == segments.begin()) return nullptr;
  --it;
  return t < it->end ? &*it : nullptr;
}

std::string_view to_string(TransitionCategory c) {
  switch (c) {
    case TransitionCategory::CleanTurnTaking: return "CleanTurnTaking";
    case TransitionCategory::OverlapTurnTaking: return "OverlapTurnTaking";
    case TransitionCategory::Backchannel: return "Backchannel";
    case TransitionCategory::ContinuingSpeech: return "ContinuingSpeech";
  }
  return "?";
}

TransitionCategory parse_transition_category(std::string_view name) {
  for (auto c : {TransitionCategory::CleanTurnTaking, TransitionCategory::OverlapTurnTaking,
                 TransitionCategory::Backchannel, TransitionCategory::ContinuingSpeech}) {
    if (to_string(c) == name) return c;
  }
  fail(ErrorCode::MalformedInput, "unknown transition category '" + std::string(name) + "'");
}

std::vector<SpeechEvent> detect_ipus(std::string_view user_id, std::span<const double> t,
                                     std::span<const double> volume, double threshold) {
  if (t.size() != volume.size()) fail(ErrorCode::Internal, "detect_ipus size mismatch");
  std::vector<SpeechEvent> events;
  bool open = false;
  SpeechEvent cur;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const bool speaking = volume[i] > threshold;
    const bool clock_break = i > 0 && t[i] - t[i - 1] > 1.5 * kFramePeriod;
    if (open && (!speaking || clock_break)) {
      events.push_back(cur);
      open = false;
    }
    if (speaking) {
      if (!open) {
        cur = SpeechEvent{std::string(user_id), t[i], t[i] + kFramePeriod};
        open = true;
      } else {
        cur.end = t[i] + kFramePeriod;
      }
    }
  }
  if (open) events.push_back(cur);
  return events;
}

std::vector<SpeechEvent> detect_ipus(const UserStream& stream, double threshold) {
  std::vector<double> t, v;
  t.reserve(stream.frames.size());
  v.reserve(stream.frames.size());
  for (const auto& f : stream.frames) {
    t.push_back(f.timestamp);
    v.push_back(f.volume);
  }
  return detect_ipus(stream.user_id, t, v, threshold);
}

std::vector<SpeechEvent> smooth_ipus(std::vector<SpeechEvent> events, double max_gap) {
  std::sort(events.begin(), events.end(), [](const SpeechEvent& a, const SpeechEvent& b) {
    return std::tie(a.user_id, a.start, a.end) < std::tie(b.user_id, b.start, b.end);
  });
  std::vector<SpeechEvent> out;
  for (auto& e : events) {
    if (!out.empty() && out.back().user_id == e.user_id && e.start - out.back().end <= max_gap + kLabelEpsilon) {
      out.back().end = std::max(out.back().end, e.end);
    } else {
      out.push_back(std::move(e));
    }
  }
  std::sort(out.begin(), out.end(), by_start_then_user);
  return out;
}

MainSpeakerTimeline resolve_main_speaker(std::span<const SpeechEvent> all_events) {
  std::vector<SpeechEvent> survivors;
  for (std::size_t i = 0; i < all_events.size(); ++i) {
    bool contained = false;
    for (std::size_t j = 0; j < all_events.size() && !contained; ++j) {
      if (i != j && contained_in(all_events[i], all_events[j])) contained = true;
    }
    if (!contained) survivors.push_back(all_events[i]);
  }
  // Without containment, ordering by start also orders by end.
  std::sort(survivors.begin(), survivors.end(), by_start_then_user);

  MainSpeakerTimeline timeline;
  for (const auto& e : survivors) {
    MainSegment seg{e.user_id, e.start, e.end, e.start, e.end};
    if (!timeline.segments.empty()) {
      MainSegment& prev = timeline.segments.back();
      seg.start = std::max(seg.start, prev.end);
      if (prev.speaker_id == e.user_id && seg.start - prev.end <= kLabelEpsilon) {
        prev.end = std::max(prev.end, seg.end);
        prev.event_end = std::max(prev.event_end, e.end);
        continue;
      }
    }
    if (seg.end > seg.start) timeline.segments.push_back(std::move(seg));
  }
  return timeline;
}

std::vector<TransitionEvent> categorize_transitions(const MainSpeakerTimeline& timeline,
                                                    std::span<const SpeechEvent> all_events,
                                                    double min_event_duration) {
  std::vector<TransitionEvent> out;
  const auto& segs = timeline.segments;
  for (std::size_t i = 1; i < segs.size(); ++i) {
    const MainSegment& prev = segs[i - 1];
    const MainSegment& cur = segs[i];
    TransitionEvent ev;
    ev.onset = cur.event_start;
    ev.new_speaker_id = cur.speaker_id;
    ev.previous_speaker_id = prev.speaker_id;
    ev.event_duration = cur.event_end - cur.event_start;
    if (cur.speaker_id == prev.speaker_id) {
      ev.category = TransitionCategory::ContinuingSpeech;
    } else if (cur.event_start < prev.end - kLabelEpsilon) {
      ev.category = TransitionCategory::OverlapTurnTaking;
    } else {
      ev.category = TransitionCategory::CleanTurnTaking;
    }
    out.push_back(std::move(ev));
  }

  // Backchannels: another speaker's event swallowed whole by a different user.
  for (std::size_t i = 0; i < all_events.size(); ++i) {
    const SpeechEvent& e = all_events[i];
    const SpeechEvent* container = nullptr;
    for (std::size_t j = 0; j < all_events.size(); ++j) {
      if (i != j && contained_in(e, all_events[j]) && all_events[j].user_id != e.user_id) {
        container = &all_events[j];
        break;
      }
    }
    if (container == nullptr) continue;
    TransitionEvent ev;
    ev.category = TransitionCategory::Backchannel;
    ev.onset = e.start;
    ev.new_speaker_id = e.user_id;
    const MainSegment* main = timeline.at(e.start);
    ev.previous_speaker_id = (main != nullptr && main->speaker_id != e.user_id) ? main->speaker_id
                                                                               : container->user_id;
    ev.event_duration = e.duration();
    out.push_back(std::move(ev));
  }

  std::erase_if(out, [&](const TransitionEvent& ev) {
    return ev.event_duration < min_event_duration - kLabelEpsilon;
  });
  std::sort(out.begin(), out.end(), [](const TransitionEvent& a, const TransitionEvent& b) {
    return std::tie(a.onset, a.category, a.new_speaker_id) < std::tie(b.onset, b.category, b.new_speaker_id);
  });
  return out;
}

SessionLabels label_session(const SessionRecording& rec, const LabelConfig& cfg) {
  SessionLabels labels;
  std::vector<SpeechEvent> raw;
  for (const auto& s : rec.streams) {
    auto ev = detect_ipus(s, cfg.volume_threshold);
    raw.insert(raw.end(), ev.begin(), ev.end());
  }
  labels.events = smooth_ipus(std::move(raw), cfg.max_gap);
  labels.timeline = resolve_main_speaker(labels.events);
  labels.transitions = categorize_transitions(labels.timeline, labels.events, cfg.min_event_duration);
  return labels;
}

std::string labels_to_json(const std::string& session_id, const SessionLabels& labels,
                           const std::string& config_hash) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["session_id"] = session_id;
  doc["config_hash"] = config_hash;
  doc["transitions"] = ordered_json::array();
  for (const auto& t : labels.transitions) {
    ordered_json j;
    j["category"] = std::string(to_string(t.category));
    j["onset"] = t.onset;
    j["new_speaker"] = t.new_speaker_id;
    j["prev_speaker"] = t.previous_speaker_id ? ordered_json(*t.previous_speaker_id) : ordered_json(nullptr);
    doc["transitions"].push_back(std::move(j));
  }
  doc["timeline"] = ordered_json::array();
  for (const auto& s : labels.timeline.segments) {
    ordered_json j;
    j["speaker"] = s.speaker_id;
    j["start"] = s.start;
    j["end"] = s.end;
    doc["timeline"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

}  // namespace vrturn
