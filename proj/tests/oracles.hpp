#pragma once

// Reference implementations that share no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "vrturn/recording.hpp"
#include "vrturn/rng.hpp"

namespace oracle {

struct P {
  double x, z;
};

// View triangle straight from the pose: apex at the head, edges at yaw +/- 52 deg.
inline std::array<P, 3> view_triangle(const vrturn::DevicePose& head, double side) {
  const double k = std::numbers::pi / 180.0;
  const double l = (head.yaw - 52.0) * k, r = (head.yaw + 52.0) * k;
  return {P{head.x, head.z}, P{head.x + side * std::sin(l), head.z + side * std::cos(l)},
          P{head.x + side * std::sin(r), head.z + side * std::cos(r)}};
}

inline bool inside(const std::array<P, 3>& t, double x, double z) {
  auto side = [&](const P& a, const P& b) { return (b.x - a.x) * (z - a.z) - (b.z - a.z) * (x - a.x); };
  const double d1 = side(t[0], t[1]), d2 = side(t[1], t[2]), d3 = side(t[2], t[0]);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

// Area of the intersection by uniform sampling over A's bounding box.
inline double mc_overlap(const std::array<P, 3>& a, const std::array<P, 3>& b, std::size_t n, vrturn::Rng& rng) {
  double x0 = a[0].x, x1 = a[0].x, z0 = a[0].z, z1 = a[0].z;
  for (const auto& p : a) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    z0 = std::min(z0, p.z), z1 = std::max(z1, p.z);
  }
  std::size_t hit = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(x0, x1), z = rng.uniform(z0, z1);
    if (inside(a, x, z) && inside(b, x, z)) ++hit;
  }
  return (x1 - x0) * (z1 - z0) * static_cast<double>(hit) / static_cast<double>(n);
}

// Fraction of correctly ordered (positive, negative) pairs, ties counting half.
inline double auc_pairs(std::span<const double> s, std::span<const int> y) {
  double num = 0;
  double den = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      den += 1;
      if (s[i] > s[j]) num += 1;
      else if (s[i] == s[j]) num += 0.5;
    }
  }
  return num / den;
}

}  // namespace oracle
