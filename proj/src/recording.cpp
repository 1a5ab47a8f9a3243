#include "vrturn/recording.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "vrturn/error.hpp"
#include "vrturn/numeric_format.hpp"

namespace vrturn {

using nlohmann::json;

std::size_t SessionManifest::index_of(std::string_view user_id) const {
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (users[i].user_id == user_id) return i;
  }
  fail(ErrorCode::UnknownUser, "user '" + std::string(user_id) + "' not in session " + session_id);
}

bool SessionManifest::contains(std::string_view user_id) const {
  return std::any_of(users.begin(), users.end(),
                     [&](const UserInfo& u) { return u.user_id == user_id; });
}

const UserStream& SessionRecording::stream(std::string_view user_id) const {
  for (const auto& s : streams) {
    if (s.user_id == user_id) return s;
  }
  fail(ErrorCode::UnknownUser, "no stream for user '" + std::string(user_id) + "'");
}

double SessionRecording::start_time() const {
  if (streams.empty() || streams.front().frames.empty()) return 0.0;
  return streams.front().frames.front().timestamp;
}

double SessionRecording::end_time() const {
  if (streams.empty() || streams.front().frames.empty()) return 0.0;
  return streams.front().frames.back().timestamp + kFramePeriod;
}

const UserSlice& FrameWindow::user(std::string_view user_id) const {
  for (const auto& u : users) {
    if (u.user_id == user_id) return u;
  }
  fail(ErrorCode::UnknownUser, "user '" + std::string(user_id) + "' not in window");
}

// ---------------------------------------------------------------------------
// Validation

void validate_pose(const DevicePose& p, std::string_view context) {
  const double values[] = {p.x, p.y, p.z, p.roll, p.pitch, p.yaw};
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidPose, std::string(context) + ": non-finite value");
  }
  if (!(p.yaw > -180.0 && p.yaw <= 180.0))
    fail(ErrorCode::InvalidPose, std::string(context) + ": yaw outside (-180, 180]");
  if (!(p.roll > -180.0 && p.roll <= 180.0))
    fail(ErrorCode::InvalidPose, std::string(context) + ": roll outside (-180, 180]");
  if (!(p.pitch >= -90.0 && p.pitch <= 90.0))
    fail(ErrorCode::InvalidPose, std::string(context) + ": pitch outside [-90, 90]");
}

void validate_frame(const UserFrame& f) {
  if (!std::isfinite(f.timestamp)) fail(ErrorCode::MalformedInput, "non-finite timestamp");
  const std::string ctx = "user " + f.user_id + " t=" + format_double(f.timestamp);
  if (!std::isfinite(f.volume) || f.volume < 0.0 || f.volume > 1.0)
    fail(ErrorCode::VolumeOutOfRange, ctx + ": volume " + std::to_string(f.volume));
  validate_pose(f.root, ctx + " root");
  validate_pose(f.head, ctx + " head");
  validate_pose(f.left_hand, ctx + " left");
  validate_pose(f.right_hand, ctx + " right");
}

void validate_manifest(const SessionManifest& m) {
  if (m.users.size() < 3)
    fail(ErrorCode::GroupTooSmall, "session " + m.session_id + " has " +
                                       std::to_string(m.users.size()) + " users (need 3-4)");
  if (m.users.size() > 4)
    fail(ErrorCode::GroupTooLarge, "session " + m.session_id + " has " +
                                       std::to_string(m.users.size()) + " users (need 3-4)");
  if (m.week < 1 || m.week > 4) fail(ErrorCode::MalformedInput, "week must be in 1..4");
  for (std::size_t i = 0; i < m.users.size(); ++i) {
    const auto& u = m.users[i];
    if (u.user_id.empty()) fail(ErrorCode::MalformedInput, "empty user_id");
    for (std::size_t j = 0; j < i; ++j) {
      if (m.users[j].user_id == u.user_id)
        fail(ErrorCode::MalformedInput, "duplicate user_id " + u.user_id);
    }
    const double traits[] = {u.big5.openness, u.big5.conscientiousness, u.big5.extraversion,
                             u.big5.agreeableness, u.big5.neuroticism};
    for (double t : traits) {
      if (!std::isfinite(t) || t < 1.0 || t > 7.0)
        fail(ErrorCode::MalformedInput, "big5 trait of " + u.user_id + " outside [1, 7]");
    }
  }
}

// ---------------------------------------------------------------------------
// Manifest and frames documents

SessionManifest parse_manifest(std::string_view text) {
  SessionManifest m;
  try {
    const json doc = json::parse(text);
    m.session_id = doc.at("session_id").get<std::string>();
    m.group_id = doc.at("group_id").get<std::string>();
    m.week = doc.at("week").get<int>();
    for (const auto& u : doc.at("users")) {
      UserInfo info;
      info.user_id = u.at("user_id").get<std::string>();
      const auto& b = u.at("big5");
      info.big5 = Big5{b.at("o").get<double>(), b.at("c").get<double>(), b.at("e").get<double>(),
                       b.at("a").get<double>(), b.at("n").get<double>()};
      m.users.push_back(std::move(info));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedInput, std::string("manifest: ") + e.what());
  }
  validate_manifest(m);
  return m;
}

std::string serialize_manifest(const SessionManifest& m) {
  std::ostringstream out;
  out << "{\"session_id\":" << json(m.session_id).dump() << ",\"group_id\":" << json(m.group_id).dump()
      << ",\"week\":" << m.week << ",\"users\":[";
  for (std::size_t i = 0; i < m.users.size(); ++i) {
    const auto& u = m.users[i];
    if (i) out << ',';
    out << "{\"user_id\":" << json(u.user_id).dump() << ",\"big5\":{\"o\":"
        << format_double(u.big5.openness) << ",\"c\":" << format_double(u.big5.conscientiousness)
        << ",\"e\":" << format_double(u.big5.extraversion)
        << ",\"a\":" << format_double(u.big5.agreeableness)
        << ",\"n\":" << format_double(u.big5.neuroticism) << "}}";
  }
  out << "]}\n";
  return out.str();
}

namespace {

DevicePose parse_pose(const json& j) {
  return DevicePose{j.at("x").get<double>(),    j.at("y").get<double>(),     j.at("z").get<double>(),
                    j.at("roll").get<double>(), j.at("pitch").get<double>(), j.at("yaw").get<double>()};
}

void write_pose(std::string& out, const DevicePose& p) {
  out += "{\"x\":" + format_double(p.x) + ",\"y\":" + format_double(p.y) +
         ",\"z\":" + format_double(p.z) + ",\"roll\":" + format_double(p.roll) +
         ",\"pitch\":" + format_double(p.pitch) + ",\"yaw\":" + format_double(p.yaw) + "}";
}

}  // namespace

std::vector<UserFrame> parse_frames(std::string_view text) {
  std::vector<UserFrame> frames;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    UserFrame f;
    try {
      const json j = json::parse(line);
      f.timestamp = j.at("t").get<double>();
      f.user_id = j.at("user").get<std::string>();
      f.root = parse_pose(j.at("root"));
      f.head = parse_pose(j.at("head"));
      f.left_hand = parse_pose(j.at("left"));
      f.right_hand = parse_pose(j.at("right"));
      f.volume = j.at("vol").get<double>();
    } catch (const json::exception& e) {
      fail(ErrorCode::MalformedInput, "frames line " + std::to_string(line_no) + ": " + e.what());
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::string serialize_frame(const UserFrame& f) {
  std::string out;
  out.reserve(420);
  out += "{\"t\":" + format_double(f.timestamp) + ",\"user\":" + json(f.user_id).dump() + ",\"root\":";
  write_pose(out, f.root);
  out += ",\"head\":";
  write_pose(out, f.head);
  out += ",\"left\":";
  write_pose(out, f.left_hand);
  out += ",\"right\":";
  write_pose(out, f.right_hand);
  out += ",\"vol\":" + format_double(f.volume) + "}\n";
  return out;
}

std::string serialize_frames(const SessionRecording& rec) {
  // Merge the per-user streams by timestamp; ties resolved by roster order.
  std::vector<std::size_t> cursor(rec.streams.size(), 0);
  std::string out;
  for (;;) {
    std::size_t best = rec.streams.size();
    for (std::size_t u = 0; u < rec.streams.size(); ++u) {
      if (cursor[u] >= rec.streams[u].frames.size()) continue;
      if (best == rec.streams.size() ||
          rec.streams[u].frames[cursor[u]].timestamp < rec.streams[best].frames[cursor[best]].timestamp)
        best = u;
    }
    if (best == rec.streams.size()) break;
    out += serialize_frame(rec.streams[best].frames[cursor[best]++]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembly and alignment

SessionRecording assemble_recording(SessionManifest manifest, std::vector<UserFrame> frames) {
  validate_manifest(manifest);
  std::vector<std::vector<UserFrame>> per_user(manifest.users.size());
  for (auto& f : frames) {
    validate_frame(f);
    const std::size_t idx = manifest.index_of(f.user_id);
    auto& dst = per_user[idx];
    if (!dst.empty() && !(f.timestamp > dst.back().timestamp))
      fail(ErrorCode::NonMonotonicTime,
           "user " + f.user_id + " timestamps not strictly increasing at t=" + format_double(f.timestamp));
    dst.push_back(std::move(f));
  }
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    if (per_user[u].empty())
      fail(ErrorCode::UserMismatch, "manifest user " + manifest.users[u].user_id + " has no frames");
  }

  SessionRecording rec;
  rec.streams.resize(manifest.users.size());
  rec.streams[0] = UserStream{manifest.users[0].user_id, std::move(per_user[0])};
  const auto& ref = rec.streams[0].frames;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  for (std::size_t u = 1; u < per_user.size(); ++u) {
    const auto& src = per_user[u];
    UserStream out{manifest.users[u].user_id, {}};
    out.frames.reserve(src.size());
    // Each reference tick takes the nearest source frame within tolerance;
    // each source frame is used at most once.
    std::size_t j = 0;
    std::size_t last_used = kNone;
    for (const auto& tick : ref) {
      while (j + 1 < src.size() &&
             std::abs(src[j + 1].timestamp - tick.timestamp) <= std::abs(src[j].timestamp - tick.timestamp))
        ++j;
      if (j == last_used) continue;
      if (std::abs(src[j].timestamp - tick.timestamp) <= kAlignmentTolerance + kTimeEpsilon) {
        UserFrame f = src[j];
        f.timestamp = tick.timestamp;
        out.frames.push_back(std::move(f));
        last_used = j;
      }
    }
    const std::size_t dropped = src.size() - out.frames.size();
    if (dropped > 0) rec.alignment_drops.push_back({out.user_id, dropped});
    rec.streams[u] = std::move(out);
  }
  rec.manifest = std::move(manifest);
  return rec;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

SessionRecording load_recording(const std::filesystem::path& manifest_path,
                                const std::filesystem::path& frames_path) {
  SessionManifest manifest = parse_manifest(read_text_file(manifest_path));
  std::vector<UserFrame> frames = parse_frames(read_text_file(frames_path));
  return assemble_recording(std::move(manifest), std::move(frames));
}

void save_recording(const SessionRecording& rec, const std::filesystem::path& manifest_path,
                    const std::filesystem::path& frames_path) {
  write_text_file(manifest_path, serialize_manifest(rec.manifest));
  write_text_file(frames_path, serialize_frames(rec));
}

std::vector<SessionRecording> load_recording_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::Io, "not a directory: " + dir.string());
  std::vector<std::string> ids;
  const std::string suffix = ".manifest.json";
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix))
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  std::vector<SessionRecording> out;
  out.reserve(ids.size());
  for (const auto& id : ids)
    out.push_back(load_recording(dir / (id + ".manifest.json"), dir / (id + ".frames.jsonl")));
  return out;
}

void save_recording_dir(const SessionRecording& rec, const std::filesystem::path& dir) {
  const std::string& id = rec.manifest.session_id;
  save_recording(rec, dir / (id + ".manifest.json"), dir / (id + ".frames.jsonl"));
}

// ---------------------------------------------------------------------------
// Reporting and windows

ValidationReport validate_recording(const SessionRecording& rec, double volume_threshold) {
  ValidationReport report;
  report.session_id = rec.manifest.session_id;
  report.alignment_drops = rec.alignment_drops;
  std::size_t total = 0;
  std::size_t speaking = 0;
  for (const auto& s : rec.streams) {
    UserValidation uv{s.user_id, s.frames.size(), 0.0};
    std::size_t above = 0;
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      if (s.frames[i].volume > volume_threshold) ++above;
      if (i > 0) {
        const double delta = s.frames[i].timestamp - s.frames[i - 1].timestamp;
        if (delta > 0.1 + kTimeEpsilon)
          report.gaps.push_back({s.user_id, s.frames[i - 1].timestamp, delta - kFramePeriod});
      }
    }
    uv.speech_fraction = s.frames.empty() ? 0.0 : static_cast<double>(above) / s.frames.size();
    total += s.frames.size();
    speaking += above;
    report.users.push_back(uv);
  }
  report.speech_fraction = total == 0 ? 0.0 : static_cast<double>(speaking) / total;
  return report;
}

std::string ValidationReport::to_json() const {
  json doc;
  doc["session_id"] = session_id;
  doc["speech_fraction"] = speech_fraction;
  doc["users"] = json::array();
  for (const auto& u : users)
    doc["users"].push_back({{"user_id", u.user_id}, {"frames", u.frame_count}, {"speech_fraction", u.speech_fraction}});
  doc["gaps"] = json::array();
  for (const auto& g : gaps) doc["gaps"].push_back({{"user_id", g.user_id}, {"after", g.after}, {"gap", g.gap}});
  doc["alignment_drops"] = json::array();
  for (const auto& d : alignment_drops)
    doc["alignment_drops"].push_back({{"user_id", d.user_id}, {"dropped", d.dropped}});
  return doc.dump(2) + "\n";
}

FrameWindow slice_window(const SessionRecording& rec, double start, double duration) {
  if (!(duration > 0.0)) fail(ErrorCode::WindowOutOfRange, "window duration must be positive");
  const double lo = rec.start_time();
  const double hi = rec.end_time();
  if (start < lo - kTimeEpsilon || start + duration > hi + kTimeEpsilon)
    fail(ErrorCode::WindowOutOfRange, "window [" + format_double(start) + ", " +
                                          format_double(start + duration) + ") outside recording");
  FrameWindow w;
  w.start = start;
  w.duration = duration;
  // The bounds are shifted by the same epsilon on both ends so adjacent
  // windows tile the clock exactly.
  const double from = start - kTimeEpsilon;
  const double to = start + duration - kTimeEpsilon;
  for (const auto& s : rec.streams) {
    auto first = std::lower_bound(s.frames.begin(), s.frames.end(), from,
                                  [](const UserFrame& f, double t) { return f.timestamp < t; });
    auto last = std::lower_bound(first, s.frames.end(), to,
                                 [](const UserFrame& f, double t) { return f.timestamp < t; });
    const auto n = static_cast<std::size_t>(last - first);
    if (n < 2)
      fail(ErrorCode::WindowTooSparse, "user " + s.user_id + " has " + std::to_string(n) +
                                           " frames in window at " + format_double(start));
    w.users.push_back(UserSlice{s.user_id, std::span<const UserFrame>(&*first, n)});
  }
  return w;
}

}  // namespace vrturn
