#include "vrturn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "vrturn/error.hpp"

namespace vrturn {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct Mat3 {
  double m[3][3];

  Mat3 operator*(const Mat3& o) const {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
    return r;
  }
};

// R = Ry(yaw) * Rx(pitch) * Rz(roll); forward (0,0,1) maps to
// (cos p sin y, -sin p, cos p cos y).
Mat3 rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg) {
  const double cy = std::cos(yaw_deg * kDegToRad), sy = std::sin(yaw_deg * kDegToRad);
  const double cp = std::cos(pitch_deg * kDegToRad), sp = std::sin(pitch_deg * kDegToRad);
  const double cr = std::cos(roll_deg * kDegToRad), sr = std::sin(roll_deg * kDegToRad);
  const Mat3 ry{{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
  const Mat3 rx{{{1, 0, 0}, {0, cp, -sp}, {0, sp, cp}}};
  const Mat3 rz{{{cr, -sr, 0}, {sr, cr, 0}, {0, 0, 1}}};
  return ry * rx * rz;
}

void euler_from_rotation(const Mat3& r, double& yaw_deg, double& pitch_deg, double& roll_deg) {
  pitch_deg = std::asin(std::clamp(-r.m[1][2], -1.0, 1.0)) * kRadToDeg;
  yaw_deg = wrap_degrees(std::atan2(r.m[0][2], r.m[2][2]) * kRadToDeg);
  roll_deg = wrap_degrees(std::atan2(r.m[1][0], r.m[1][1]) * kRadToDeg);
}

Point2 heading_dir(double heading_deg) {
  return {std::sin(heading_deg * kDegToRad), std::cos(heading_deg * kDegToRad)};
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

}  // namespace

double wrap_degrees(double degrees) {
  double r = std::fmod(degrees, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

double shortest_angle_diff(double from, double to) { return wrap_degrees(to - from); }

DevicePose compose_pose(const DevicePose& parent, const DevicePose& local) {
  const Mat3 rp = rotation_from_euler(parent.yaw, parent.pitch, parent.roll);
  DevicePose out;
  out.x = parent.x + rp.m[0][0] * local.x + rp.m[0][1] * local.y + rp.m[0][2] * local.z;
  out.y = parent.y + rp.m[1][0] * local.x + rp.m[1][1] * local.y + rp.m[1][2] * local.z;
  out.z = parent.z + rp.m[2][0] * local.x + rp.m[2][1] * local.y + rp.m[2][2] * local.z;
  if (parent.pitch == 0.0 && parent.roll == 0.0) {
    // Yaw-only parents (the common case) compose exactly.
    out.yaw = wrap_degrees(parent.yaw + local.yaw);
    out.pitch = local.pitch;
    out.roll = local.roll;
  } else {
    const Mat3 r = rp * rotation_from_euler(local.yaw, local.pitch, local.roll);
    euler_from_rotation(r, out.yaw, out.pitch, out.roll);
  }
  return out;
}

const DevicePose& WorldPoses::operator[](Device d) const {
  switch (d) {
    case Device::Head: return head;
    case Device::LeftHand: return left_hand;
    case Device::RightHand: return right_hand;
  }
  return head;
}

WorldPoses world_poses(const UserFrame& f) {
  return {compose_pose(f.root, f.head), compose_pose(f.root, f.left_hand), compose_pose(f.root, f.right_hand)};
}

BodySpaceWindow body_space_transform(std::span<const UserFrame> frames, bool centered) {
  if (frames.size() < 2) fail(ErrorCode::WindowTooSparse, "body-space transform needs >= 2 frames");
  BodySpaceWindow out;
  out.centered = centered;
  out.timestamps.reserve(frames.size());
  for (auto& d : out.devices) d.reserve(frames.size());
  for (const auto& f : frames) {
    const WorldPoses w = world_poses(f);
    const double heading = w.head.yaw;
    const double c = std::cos(heading * kDegToRad);
    const double s = std::sin(heading * kDegToRad);
    const double ox = centered ? w.head.x : 0.0;
    const double oz = centered ? w.head.z : 0.0;
    out.timestamps.push_back(f.timestamp);
    for (Device d : kTrackedDevices) {
      const DevicePose& p = w[d];
      const double dx = p.x - ox;
      const double dz = p.z - oz;
      DevicePose b;
      b.x = c * dx - s * dz;
      b.z = s * dx + c * dz;
      b.y = p.y;
      b.yaw = d == Device::Head ? 0.0 : wrap_degrees(p.yaw - heading);
      b.pitch = p.pitch;
      b.roll = p.roll;
      if (centered && d == Device::Head) {
        b.x = 0.0;
        b.z = 0.0;
      }
      out.devices[static_cast<int>(d)].push_back(b);
    }
  }
  return out;
}

BodySpaceWindow body_space_transform(const FrameWindow& window, std::string_view user_id, bool centered) {
  return body_space_transform(window.user(user_id).frames, centered);
}

std::vector<double> velocity_series(std::span<const double> t, std::span<const double> v) {
  if (t.size() != v.size()) fail(ErrorCode::Internal, "velocity_series size mismatch");
  if (t.size() < 2) fail(ErrorCode::WindowTooSparse, "velocity needs >= 2 samples");
  std::vector<double> out(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) out[i - 1] = (v[i] - v[i - 1]) / (t[i] - t[i - 1]);
  return out;
}

std::vector<double> yaw_velocity_series(std::span<const double> t, std::span<const double> yaw) {
  if (t.size() != yaw.size()) fail(ErrorCode::Internal, "yaw_velocity_series size mismatch");
  if (t.size() < 2) fail(ErrorCode::WindowTooSparse, "yaw velocity needs >= 2 samples");
  std::vector<double> out(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i)
    out[i - 1] = shortest_angle_diff(yaw[i - 1], yaw[i]) / (t[i] - t[i - 1]);
  return out;
}

double direct_gaze_angle(const DevicePose& a, const DevicePose& b) {
  const double vx = b.x - a.x;
  const double vz = b.z - a.z;
  if (std::hypot(vx, vz) < kCoincidentHeadDistance)
    fail(ErrorCode::CoincidentHeads, "heads closer than 1 mm horizontally");
  const Point2 f = heading_dir(a.yaw);
  const double dot = f.x * vx + f.z * vz;
  const double crs = f.x * vz - f.z * vx;
  return std::atan2(std::abs(crs), dot) * kRadToDeg;
}

double interpersonal_distance(const DevicePose& a, const DevicePose& b) {
  return std::hypot(b.x - a.x, b.z - a.z);
}

std::array<Point2, 3> FovTriangle::vertices() const {
  const double half = apex_angle / 2.0;
  const Point2 d1 = heading_dir(heading - half);
  const Point2 d2 = heading_dir(heading + half);
  std::array<Point2, 3> v{apex, Point2{apex.x + side_length * d1.x, apex.z + side_length * d1.z},
                          Point2{apex.x + side_length * d2.x, apex.z + side_length * d2.z}};
  if (signed_polygon_area(v) < 0.0) std::swap(v[1], v[2]);
  return v;
}

double FovTriangle::area() const {
  return 0.5 * side_length * side_length * std::sin(apex_angle * kDegToRad);
}

FovTriangle fov_triangle(const DevicePose& head, double side_length) {
  return FovTriangle{Point2{head.x, head.z}, head.yaw, side_length, kFovDegrees};
}

double signed_polygon_area(std::span<const Point2> poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.z - q.x * p.z;
  }
  return 0.5 * twice;
}

std::vector<Point2> clip_convex(std::span<const Point2> subject, std::span<const Point2> clip) {
  std::vector<Point2> out(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % clip.size()];
    std::vector<Point2> in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Point2& p = in[i];
      const Point2& q = in[(i + 1) % in.size()];
      const double sp = cross(a, b, p);
      const double sq = cross(a, b, q);
      const bool p_in = sp >= 0.0;
      const bool q_in = sq >= 0.0;
      if (p_in) out.push_back(p);
      if (p_in != q_in) {
        const double t = sp / (sp - sq);
        out.push_back(Point2{p.x + t * (q.x - p.x), p.z + t * (q.z - p.z)});
      }
    }
  }
  return out;
}

double triangle_overlap_area(const FovTriangle& a, const FovTriangle& b) {
  const auto va = a.vertices();
  const auto vb = b.vertices();
  const auto poly = clip_convex(va, vb);
  const double area = std::abs(signed_polygon_area(poly));
  return area < kAreaEpsilon ? 0.0 : area;
}

double visual_shared_space(const DevicePose& a_head, const DevicePose& b_head, double vs_l) {
  if (!(vs_l > 0.0)) fail(ErrorCode::InvalidConfig, "visual shared space side length must be positive");
  FovTriangle a = fov_triangle(a_head, vs_l);
  FovTriangle b = fov_triangle(b_head, vs_l);
  // Clip in a canonical order so the result does not depend on argument order.
  if (std::tie(b.apex.x, b.apex.z, b.heading) < std::tie(a.apex.x, a.apex.z, a.heading)) std::swap(a, b);
  return triangle_overlap_area(a, b);
}

}  // namespace vrturn
