#pragma once

#include <array>
#include <span>
#include <vector>

#include "vrturn/recording.hpp"

namespace vrturn {

/// Horizontal field of view of the headset used for shared-space triangles.
inline constexpr double kFovDegrees = 104.0;
/// Heads closer than this horizontally have no defined gaze direction.
inline constexpr double kCoincidentHeadDistance = 1e-3;
/// Intersections below this area (m^2) are treated as empty.
inline constexpr double kAreaEpsilon = 1e-9;

/// Maps any angle to (-180, 180].
double wrap_degrees(double degrees);
/// Signed shortest rotation from `from` to `to`, in (-180, 180].
double shortest_angle_diff(double from, double to);

/// Re-expresses a pose given relative to `parent` in the parent's space.
/// Rotations compose as yaw (about y), then pitch (about x, positive looks
/// down), then roll (about the forward axis).
DevicePose compose_pose(const DevicePose& parent, const DevicePose& local);

enum class Device { Head = 0, LeftHand = 1, RightHand = 2 };
inline constexpr std::array<Device, 3> kTrackedDevices = {Device::Head, Device::LeftHand, Device::RightHand};

struct WorldPoses {
  DevicePose head;
  DevicePose left_hand;
  DevicePose right_hand;

  const DevicePose& operator[](Device d) const;
};

WorldPoses world_poses(const UserFrame& frame);

/// Per-device pose series relative to the head's yaw heading.
struct BodySpaceWindow {
  bool centered = false;
  std::vector<double> timestamps;
  std::array<std::vector<DevicePose>, 3> devices;  // indexed by Device

  const std::vector<DevicePose>& operator[](Device d) const { return devices[static_cast<int>(d)]; }
};

/// Throws WindowTooSparse for fewer than two frames.
BodySpaceWindow body_space_transform(std::span<const UserFrame> frames, bool centered);
BodySpaceWindow body_space_transform(const FrameWindow& window, std::string_view user_id, bool centered);

/// Finite differences divided by the timestamp deltas.
std::vector<double> velocity_series(std::span<const double> timestamps, std::span<const double> values);
/// Same, with each step taken as the shortest signed angle. This is how head
/// yaw velocity is measured before any coordinate transform.
std::vector<double> yaw_velocity_series(std::span<const double> timestamps, std::span<const double> yaw);

/// Unsigned horizontal angle between A's head heading and the direction from
/// A's head to B's head, in [0, 180]. Throws CoincidentHeads.
double direct_gaze_angle(const DevicePose& a_head, const DevicePose& b_head);

/// Horizontal (x-z) distance between two heads.
double interpersonal_distance(const DevicePose& a_head, const DevicePose& b_head);

/// Horizontal point; x and z world axes.
struct Point2 {
  double x = 0.0;
  double z = 0.0;
};

struct FovTriangle {
  Point2 apex;
  double heading = 0.0;  // degrees, yaw convention
  double side_length = 1.0;
  double apex_angle = kFovDegrees;

  /// Counter-clockwise in the (x, z) plane.
  std::array<Point2, 3> vertices() const;
  double area() const;
};

FovTriangle fov_triangle(const DevicePose& head, double side_length);

/// Shoelace formula; positive for counter-clockwise polygons.
double signed_polygon_area(std::span<const Point2> polygon);

/// Clips `subject` by each edge half-plane of the convex, counter-clockwise
/// polygon `clip`.
std::vector<Point2> clip_convex(std::span<const Point2> subject, std::span<const Point2> clip);

double triangle_overlap_area(const FovTriangle& a, const FovTriangle& b);

/// Overlap area (m^2) of the two users' horizontal view triangles with side
/// length vs_l. Symmetric in its arguments bit for bit.
double visual_shared_space(const DevicePose& a_head, const DevicePose& b_head, double vs_l);

}  // namespace vrturn
