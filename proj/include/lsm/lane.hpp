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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "lsm/geometry.hpp"

namespace lsm {

enum class Side { Left, Right };

enum class AdjacentKind { SameDirection, OppositeDirection, VRUs, NoLane };

enum class RoadType { Urban, Rural, Motorway };

/// Lane the vehicle would enter when leaving the ego lane on one side.
/// Speeds are m/s, angle in degrees (0 = parallel same heading, 180 = oncoming).
struct AdjacentLaneInfo {
  AdjacentKind kind = AdjacentKind::NoLane;
  double speed_limit = 0.0;
  double angle_deg = 0.0;

  bool operator==(const AdjacentLaneInfo&) const = default;
};

struct LaneContext {
  double lane_width = 3.5;  // m
  AdjacentLaneInfo left_adjacent;
  AdjacentLaneInfo right_adjacent;
  RoadType road_type = RoadType::Rural;

  const AdjacentLaneInfo& adjacent(Side side) const {
    return side == Side::Left ? left_adjacent : right_adjacent;
  }
  bool operator==(const LaneContext&) const = default;
};

/// Ground-truth ego lane. Boundaries run in driving direction.
struct Lane {
  std::string id;
  Polyline3 left_boundary;
  Polyline3 right_boundary;
  LaneContext context;

  double width() const { return context.lane_width; }
  bool operator==(const Lane&) const = default;
};

struct EgoState {
  double v0 = 0.0;             // m/s
  double vehicle_width = 2.0;  // m

  bool operator==(const EgoState&) const = default;
};

/// One frame of lane detection output. A missing boundary is nullopt.
struct DetectionFrame {
  std::size_t frame_index = 0;
  double timestamp = 0.0;  // s
  EgoState ego;
  Point3 ego_origin;
  std::optional<Polyline3> left;
  std::optional<Polyline3> right;
  // Set when the producer's geometry for this frame was unusable.
  std::optional<std::string> geometry_error;

  bool operator==(const DetectionFrame&) const = default;
};

constexpr std::string_view to_string(Side s) { return s == Side::Left ? "left" : "right"; }

constexpr std::string_view to_string(AdjacentKind k) {
  switch (k) {
    case AdjacentKind::SameDirection: return "same_direction";
    case AdjacentKind::OppositeDirection: return "opposite_direction";
    case AdjacentKind::VRUs: return "vrus";
    case AdjacentKind::NoLane: return "no_lane";
  }
  return "no_lane";
}

constexpr std::string_view to_string(RoadType r) {
  switch (r) {
    case RoadType::Urban: return "urban";
    case RoadType::Rural: return "rural";
    case RoadType::Motorway: return "motorway";
  }
  return "rural";
}

inline std::optional<AdjacentKind> parse_adjacent_kind(std::string_view s) {
  for (auto k : {AdjacentKind::SameDirection, AdjacentKind::OppositeDirection, AdjacentKind::VRUs,
                 AdjacentKind::NoLane}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

inline std::optional<RoadType> parse_road_type(std::string_view s) {
  for (auto r : {RoadType::Urban, RoadType::Rural, RoadType::Motorway}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

}  // namespace lsm
