// Copyright 2026 The LSM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Polylines in 3D world coordinates and the handful of geometric queries the
// evaluator needs: arc length, uniform resampling, closest point and the
// centerline of a boundary pair. All distances are full 3D Euclidean.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lsm {

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Point3 operator*(double k) const { return {x * k, y * k, z * k}; }
  friend constexpr Point3 operator*(double k, const Point3& p) { return p * k; }
  constexpr bool operator==(const Point3&) const = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Point3& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }
constexpr double squared_distance(const Point3& a, const Point3& b) { return dot(a - b, a - b); }
constexpr Point3 midpoint(const Point3& a, const Point3& b) { return (a + b) * 0.5; }

// Segments shorter than this are treated as duplicate vertices.
inline constexpr double kMinSegmentLength = 1e-9;

/// Ordered sequence of at least two distinct consecutive points with a
/// cached cumulative arc length per vertex. Immutable after construction.
class Polyline3 {
 public:
  explicit Polyline3(std::vector<Point3> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
      throw GeometryError("polyline needs at least 2 points, got " + std::to_string(points_.size()));
    }
    cumulative_.reserve(points_.size());
    cumulative_.push_back(0.0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!points_[i].finite()) {
        throw GeometryError("point " + std::to_string(i) + " has a non-finite coordinate");
      }
      if (i == 0) continue;
      const double seg = distance(points_[i - 1], points_[i]);
      if (seg <= kMinSegmentLength) {
        throw GeometryError("points " + std::to_string(i - 1) + " and " + std::to_string(i) +
                            " are duplicates");
      }
      cumulative_.push_back(cumulative_.back() + seg);
    }
  }

  std::span<const Point3> points() const { return points_; }
  std::span<const double> cumulative_length() const { return cumulative_; }
  std::size_t size() const { return points_.size(); }
  double length() const { return cumulative_.back(); }
  const Point3& front() const { return points_.front(); }
  const Point3& back() const { return points_.back(); }

  // Index of the segment [i, i+1] containing arc length s (clamped).
  std::size_t segment_at(double s) const {
    if (s <= 0.0) return 0;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
    return std::min(idx == 0 ? 0 : idx - 1, points_.size() - 2);
  }

  Point3 point_at(double s) const {
    s = std::clamp(s, 0.0, length());
    const std::size_t i = segment_at(s);
    const double seg = cumulative_[i + 1] - cumulative_[i];
    const double t = std::clamp((s - cumulative_[i]) / seg, 0.0, 1.0);
    if (t == 1.0) return points_[i + 1];
    return points_[i] + (points_[i + 1] - points_[i]) * t;
  }

  /// Unit tangent of the segment containing s.
  Point3 direction_at(double s) const {
    const std::size_t i = segment_at(std::clamp(s, 0.0, length()));
    const Point3 d = points_[i + 1] - points_[i];
    return d * (1.0 / norm(d));
  }

  bool operator==(const Polyline3& o) const { return points_ == o.points_; }

 private:
  std::vector<Point3> points_;
  std::vector<double> cumulative_;
};

inline double arc_length(const Polyline3& p) { return p.length(); }

/// Points of p at s_begin, s_begin + spacing, ... and finally s_end, all on p.
/// A sample closer than a micrometre fraction of `spacing` to s_end is folded
/// into the endpoint so no near-duplicate vertex is produced.
inline std::vector<Point3> sample_range(const Polyline3& p, double s_begin, double s_end, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw GeometryError("sample spacing must be positive and finite");
  }
  s_begin = std::clamp(s_begin, 0.0, p.length());
  s_end = std::clamp(s_end, s_begin, p.length());
  const double span = s_end - s_begin;
  const double eps = spacing * 1e-6;
  std::vector<Point3> out;
  out.reserve(static_cast<std::size_t>(span / spacing) + 2);
  out.push_back(p.point_at(s_begin));
  for (std::size_t k = 1;; ++k) {
    const double offset = static_cast<double>(k) * spacing;
    if (span - offset < eps) break;
    out.push_back(p.point_at(s_begin + offset));
  }
  if (span >= eps) out.push_back(p.point_at(s_end));
  return out;
}

/// Uniform resampling; the first and last vertices of p are preserved.
inline Polyline3 resample(const Polyline3& p, double spacing) {
  auto pts = sample_range(p, 0.0, p.length(), spacing);
  pts.front() = p.front();
  pts.back() = p.back();
  return Polyline3(std::move(pts));
}

struct ClosestPoint {
  Point3 foot;
  double distance = 0.0;
  double s = 0.0;
};

/// Exact projection onto every segment; ties go to the smallest arc length.
inline ClosestPoint closest_point(const Polyline3& p, const Point3& q) {
  const auto pts = p.points();
  const auto cum = p.cumulative_length();
  ClosestPoint best{pts[0], std::numeric_limits<double>::infinity(), 0.0};
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point3 a = pts[i];
    const Point3 ab = pts[i + 1] - a;
    const double len_sq = dot(ab, ab);
    const double t = std::clamp(dot(q - a, ab) / len_sq, 0.0, 1.0);
    const Point3 foot = t == 1.0 ? pts[i + 1] : a + ab * t;
    const double d_sq = squared_distance(q, foot);
    if (d_sq < best_sq) {
      best_sq = d_sq;
      best = {foot, 0.0, cum[i] + t * (cum[i + 1] - cum[i])};
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

/// Midpoints of the two boundaries sampled at equal normalized arc-length
/// fractions. The number of pairs follows the shorter boundary.
inline Polyline3 centerline(const Polyline3& left, const Polyline3& right, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw GeometryError("centerline spacing must be positive and finite");
  }
  const double shorter = std::min(left.length(), right.length());
  if (shorter < spacing) throw GeometryError("boundary too short");
  const auto n = static_cast<std::size_t>(std::floor(shorter / spacing)) + 1;
  std::vector<Point3> mid;
  mid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n - 1);
    mid.push_back(midpoint(left.point_at(f * left.length()), right.point_at(f * right.length())));
  }
  return Polyline3(std::move(mid));
}

}  // namespace lsm
