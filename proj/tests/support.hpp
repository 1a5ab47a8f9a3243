#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "vrturn/geometry.hpp"
#include "vrturn/recording.hpp"
#include "vrturn/rng.hpp"

namespace testsupport {

// Users seated on a unit circle looking at its center, volumes given per frame.
inline vrturn::SessionRecording volume_recording(const std::vector<std::vector<double>>& volumes,
                                                 std::string session = "s1") {
  vrturn::SessionManifest m;
  m.session_id = session;
  m.group_id = "g1";
  m.week = 1;
  const std::size_t n = volumes.size();
  for (std::size_t u = 0; u < n; ++u) m.users.push_back({"u" + std::to_string(u + 1), {}});
  std::vector<vrturn::UserFrame> frames;
  for (std::size_t u = 0; u < n; ++u) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(u) / static_cast<double>(n);
    for (std::size_t f = 0; f < volumes[u].size(); ++f) {
      vrturn::UserFrame fr;
      fr.timestamp = static_cast<double>(f) / vrturn::kFrameRate;
      fr.user_id = m.users[u].user_id;
      fr.root = {std::sin(a), 0.0, std::cos(a), 0.0, 0.0, vrturn::wrap_degrees(std::atan2(-std::sin(a), -std::cos(a)) * 180.0 / std::numbers::pi)};
      fr.head = {0.0, 1.6, 0.0, 0.0, 0.0, 0.0};
      fr.left_hand = {-0.2, 1.0, 0.3, 0.0, 0.0, 0.0};
      fr.right_hand = {0.2, 1.0, 0.3, 0.0, 0.0, 0.0};
      fr.volume = volumes[u][f];
      frames.push_back(fr);
    }
  }
  return vrturn::assemble_recording(std::move(m), std::move(frames));
}

// Speech spans in frames [start, end) turned into a volume trace.
struct Span {
  int start;
  int end;
};

inline std::vector<double> trace(int n_frames, const std::vector<Span>& spans, double on = 0.5, double off = 0.02) {
  std::vector<double> v(static_cast<std::size_t>(n_frames), off);
  for (const auto& s : spans)
    for (int f = s.start; f < s.end; ++f) v[static_cast<std::size_t>(f)] = on;
  return v;
}

// Recording with random smooth motion for every device; n users, seconds long.
inline vrturn::SessionRecording random_motion_recording(std::uint64_t seed, std::size_t n, double seconds) {
  vrturn::Rng rng(seed);
  vrturn::SessionManifest m;
  m.session_id = "rm" + std::to_string(seed);
  m.group_id = "g";
  for (std::size_t u = 0; u < n; ++u) {
    vrturn::Big5 b{rng.uniform(1, 7), rng.uniform(1, 7), rng.uniform(1, 7), rng.uniform(1, 7), rng.uniform(1, 7)};
    m.users.push_back({"p" + std::to_string(u), b});
  }
  const int frames = static_cast<int>(seconds * vrturn::kFrameRate);
  std::vector<vrturn::UserFrame> out;
  for (std::size_t u = 0; u < n; ++u) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(u) / static_cast<double>(n);
    std::vector<double> phase(20);
    for (auto& p : phase) p = rng.uniform(0, 6.28);
    for (int f = 0; f < frames; ++f) {
      const double t = f / vrturn::kFrameRate;
      auto w = [&](int k, double amp) { return amp * std::sin(0.7 * (k + 1) * t + phase[k]); };
      vrturn::UserFrame fr;
      fr.timestamp = t;
      fr.user_id = m.users[u].user_id;
      fr.root = {1.5 * std::sin(a) + w(0, 0.1), 0.0, 1.5 * std::cos(a) + w(1, 0.1), 0.0, 0.0, w(2, 20)};
      fr.head = {w(3, 0.05), 1.6 + w(4, 0.05), w(5, 0.05), w(6, 10), w(7, 20), w(8, 40)};
      fr.left_hand = {-0.2 + w(9, 0.1), 1.0 + w(10, 0.1), 0.3, w(11, 30), w(12, 30), w(13, 30)};
      fr.right_hand = {0.2 + w(14, 0.1), 1.0 + w(15, 0.1), 0.3, w(16, 30), w(17, 30), w(18, 30)};
      fr.volume = std::fmod(t + u, 4.0) < 1.5 ? 0.5 : 0.0;
      out.push_back(fr);
    }
  }
  return vrturn::assemble_recording(std::move(m), std::move(out));
}

}  // namespace testsupport
