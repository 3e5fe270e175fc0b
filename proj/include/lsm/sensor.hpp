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

// Generic lane sensor: derives detected boundaries from ground truth with
// range truncation, constant or piecewise lateral offsets, Gaussian lateral
// noise and frame/boundary dropout.
//
// Randomness comes from CounterRng ("splitmix64-counter-v1"), a stateless
// generator: draw k of stream t under seed s is
//
//   key  = s ^ (t * 0xD1B54A32D192ED03)
//   bits = splitmix64_mix(key + (k + 1) * 0x9E3779B97F4A7C15)
//   u    = (bits >> 11) * 2^-53                       in [0, 1)
//
// Stream 0 holds dropout draws (k = 0 frame, 1 left, 2 right). Streams 1 and
// 2 hold the noise of the left and right boundary; sample i uses draws 2i and
// 2i+1 through Box-Muller: sqrt(-2 ln(1 - u_2i)) * cos(2 pi u_2i+1).

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lsm/geometry.hpp"
#include "lsm/lane.hpp"

namespace lsm {

class CounterRng {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64-counter-v1";

  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(seed ^ (stream * 0xD1B54A32D192ED03ULL)) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + (counter + 1) * 0x9E3779B97F4A7C15ULL); }

  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  double normal(std::uint64_t index) const {
    const double u1 = 1.0 - uniform(2 * index);  // (0, 1]
    const double u2 = uniform(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

/// Lateral offset that is `base` everywhere except on [from_s, to_s)
/// intervals, measured in meters ahead of the ego projection. Positive
/// offsets move the boundary toward the lane interior.
struct OffsetSchedule {
  struct Interval {
    double from_s = 0.0;
    double to_s = 0.0;
    double offset = 0.0;

    bool operator==(const Interval&) const = default;
  };

  double base = 0.0;
  std::vector<Interval> intervals;

  double at(double s) const {
    for (const auto& iv : intervals) {
      if (s >= iv.from_s && s < iv.to_s) return iv.offset;
    }
    return base;
  }
  bool operator==(const OffsetSchedule&) const = default;
};

struct SensorModel {
  static constexpr double kUnlimited = std::numeric_limits<double>::infinity();

  double range_left = kUnlimited;   // m of detected arc length
  double range_right = kUnlimited;  // m
  double lateral_noise_sigma = 0.0;  // m
  OffsetSchedule offset_left;
  OffsetSchedule offset_right;
  double dropout_frame_prob = 0.0;
  double dropout_boundary_prob = 0.0;
  std::uint64_t seed = 0;
  double sample_spacing = 0.1;  // m

  void validate() const {
    if (!(range_left > 0.0) || !(range_right > 0.0)) throw std::invalid_argument("sensor ranges must be > 0");
    if (!std::isfinite(lateral_noise_sigma) || lateral_noise_sigma < 0.0) {
      throw std::invalid_argument("lateral_noise_sigma must be >= 0");
    }
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(dropout_frame_prob) || !prob(dropout_boundary_prob)) {
      throw std::invalid_argument("dropout probabilities must be in [0, 1]");
    }
    if (!std::isfinite(sample_spacing) || !(sample_spacing > 0.0)) {
      throw std::invalid_argument("sensor sample_spacing must be > 0");
    }
    for (const auto* sch : {&offset_left, &offset_right}) {
      if (!std::isfinite(sch->base)) throw std::invalid_argument("offsets must be finite");
      for (const auto& iv : sch->intervals) {
        if (!std::isfinite(iv.offset) || !std::isfinite(iv.from_s) || !(iv.to_s > iv.from_s)) {
          throw std::invalid_argument("offset interval needs finite values and to_s > from_s");
        }
      }
    }
  }
  bool operator==(const SensorModel&) const = default;
};

struct SensedBoundaries {
  std::optional<Polyline3> left;
  std::optional<Polyline3> right;
};

namespace detail {

inline std::optional<Polyline3> sense_boundary(const Polyline3& gt, Side side, const Point3& ego_origin,
                                               double range, const OffsetSchedule& offsets, double sigma,
                                               const CounterRng& noise, double spacing) {
  const double s0 = closest_point(gt, ego_origin).s;
  const double s_end = std::min(gt.length(), s0 + range);
  auto pts = sample_range(gt, s0, s_end, spacing);
  if (pts.size() < 2) return std::nullopt;

  // Left boundary interior lies to the right of the driving direction.
  const double interior = side == Side::Left ? -1.0 : 1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double s_rel = i + 1 == pts.size() ? s_end - s0 : static_cast<double>(i) * spacing;
    const Point3 dir = gt.direction_at(s0 + s_rel);
    Point3 normal{-dir.y, dir.x, 0.0};
    const double n = norm(normal);
    normal = n > 1e-12 ? normal * (1.0 / n) : Point3{};
    double lateral = interior * offsets.at(s_rel);
    if (sigma > 0.0) lateral += sigma * noise.normal(i);
    pts[i] = pts[i] + normal * lateral;
  }
  try {
    return Polyline3(std::move(pts));
  } catch (const GeometryError&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Detected boundaries for one ego position. Deterministic in (inputs, seed).
inline SensedBoundaries sense(const Lane& gt_lane, const Point3& ego_origin, const SensorModel& model) {
  model.validate();
  const CounterRng dropout(model.seed, 0);
  SensedBoundaries out;
  if (dropout.uniform(0) < model.dropout_frame_prob) return out;
  const bool keep_left = !(dropout.uniform(1) < model.dropout_boundary_prob);
  const bool keep_right = !(dropout.uniform(2) < model.dropout_boundary_prob);
  if (keep_left) {
    out.left = detail::sense_boundary(gt_lane.left_boundary, Side::Left, ego_origin, model.range_left,
                                      model.offset_left, model.lateral_noise_sigma, CounterRng(model.seed, 1),
                                      model.sample_spacing);
  }
  if (keep_right) {
    out.right = detail::sense_boundary(gt_lane.right_boundary, Side::Right, ego_origin, model.range_right,
                                       model.offset_right, model.lateral_noise_sigma, CounterRng(model.seed, 2),
                                       model.sample_spacing);
  }
  return out;
}

struct TrajectoryPoint {
  double timestamp = 0.0;
  Point3 ego_origin;
  EgoState ego;

  bool operator==(const TrajectoryPoint&) const = default;
};

/// One frame per trajectory point; frame i senses with seed + i.
inline std::vector<DetectionFrame> sense_sequence(const Lane& gt_lane, std::span<const TrajectoryPoint> trajectory,
                                                  const SensorModel& model) {
  if (trajectory.empty()) throw std::invalid_argument("trajectory must not be empty");
  std::vector<DetectionFrame> frames;
  frames.reserve(trajectory.size());
  SensorModel per_frame = model;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    per_frame.seed = model.seed + i;
    SensedBoundaries b = sense(gt_lane, trajectory[i].ego_origin, per_frame);
    DetectionFrame f;
    f.frame_index = i;
    f.timestamp = trajectory[i].timestamp;
    f.ego = trajectory[i].ego;
    f.ego_origin = trajectory[i].ego_origin;
    f.left = std::move(b.left);
    f.right = std::move(b.right);
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace lsm
