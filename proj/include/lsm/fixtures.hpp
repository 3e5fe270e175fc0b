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

// Four showcase scenarios on a straight 3.5 m rural lane, 100 frames at
// 10 Hz each, where safety and point-wise performance disagree:
//
//   c_s  13.89 m/s, ranges 40/40 m, centerline off by 0.1 th_lat    (safe, good P/R)
//   c_1  27.78 m/s, ranges 30/60 m, centerline off by 0.1 th_lat    (too short, good P/R)
//   c_2  13.89 m/s, ranges 40/40 m, right boundary pushed 2.4 th_lat
//        outward on 20..30 m, sidewalk on the right                   (lane departure, good P/R)
//   c_3  13.89 m/s, ranges 40/40 m, both boundaries off by > 0.10 m,
//        centerline off by 0.2 th_lat                                 (safe, P/R near 0)
//
// With a 2.0 m vehicle th_lat = (3.5 - 2.0) / 2 = 0.75 m.

#pragma once

#include <string>
#include <vector>

#include "lsm/lane.hpp"
#include "lsm/scenario_io.hpp"
#include "lsm/sensor.hpp"

namespace lsm::fixtures {

inline constexpr double kLaneWidth = 3.5;
inline constexpr double kVehicleWidth = 2.0;
inline constexpr double kThLat = (kLaneWidth - kVehicleWidth) / 2.0;
inline constexpr double kLaneLength = 400.0;
inline constexpr std::size_t kFrames = 100;
inline constexpr double kFramePeriod = 0.1;
inline constexpr double kUrbanSpeed = 13.89;     // 50 km/h
inline constexpr double kMotorwaySpeed = 27.78;  // 100 km/h

inline Lane straight_lane() {
  const double h = kLaneWidth / 2.0;
  LaneContext ctx;
  ctx.lane_width = kLaneWidth;
  ctx.left_adjacent = {AdjacentKind::OppositeDirection, kUrbanSpeed, 180.0};
  ctx.right_adjacent = {AdjacentKind::VRUs, 0.0, 0.0};
  ctx.road_type = RoadType::Rural;
  return Lane{"ego",
              Polyline3({{0.0, h, 0.0}, {kLaneLength, h, 0.0}}),
              Polyline3({{0.0, -h, 0.0}, {kLaneLength, -h, 0.0}}),
              ctx};
}

inline std::vector<TrajectoryPoint> straight_trajectory(double speed) {
  std::vector<TrajectoryPoint> t;
  t.reserve(kFrames);
  for (std::size_t i = 0; i < kFrames; ++i) {
    const double time = static_cast<double>(i) * kFramePeriod;
    t.push_back({time, {speed * time, 0.0, 0.0}, {speed, kVehicleWidth}});
  }
  return t;
}

inline ScenarioFile make_case(std::string name, double speed, SensorModel sensor) {
  return ScenarioFile{kSchemaVersion, std::move(name), straight_lane(), EvalConfig{},
                      SyntheticSource{straight_trajectory(speed), std::move(sensor)}};
}

/// Constant interior offsets per boundary (positive toward the lane center).
inline SensorModel shifted_sensor(double range_left, double range_right, double left_in, double right_in) {
  SensorModel m;
  m.range_left = range_left;
  m.range_right = range_right;
  m.offset_left.base = left_in;
  m.offset_right.base = right_in;
  m.seed = 1;
  return m;
}

inline ScenarioFile case_s() {
  return make_case("c_s", kUrbanSpeed, shifted_sensor(40.0, 40.0, 0.1 * kThLat, -0.1 * kThLat));
}

inline ScenarioFile case_1() {
  return make_case("c_1", kMotorwaySpeed, shifted_sensor(30.0, 60.0, 0.1 * kThLat, -0.1 * kThLat));
}

inline ScenarioFile case_2() {
  SensorModel m = shifted_sensor(40.0, 40.0, 0.0, 0.0);
  m.offset_right.intervals.push_back({20.0, 30.0, -2.4 * kThLat});
  return make_case("c_2", kUrbanSpeed, m);
}

inline ScenarioFile case_3() {
  // Left moves 0.45 m right, right moves 0.15 m left: centerline 0.15 m right.
  return make_case("c_3", kUrbanSpeed, shifted_sensor(40.0, 40.0, 0.6 * kThLat, 0.2 * kThLat));
}

inline std::vector<ScenarioFile> showcase_cases() { return {case_s(), case_1(), case_2(), case_3()}; }

/// c_s with 3 cm lateral noise and frame/boundary dropout; exercises the
/// random streams.
inline ScenarioFile noisy_dropout() {
  SensorModel m = shifted_sensor(40.0, 40.0, 0.1 * kThLat, -0.1 * kThLat);
  m.lateral_noise_sigma = 0.03;
  m.dropout_frame_prob = 0.05;
  m.dropout_boundary_prob = 0.05;
  m.seed = 20240611;
  return make_case("noisy_dropout", kUrbanSpeed, m);
}

/// Everything written by `lsm test-cases --export`.
inline std::vector<ScenarioFile> exported_scenarios() {
  auto all = showcase_cases();
  all.push_back(noisy_dropout());
  return all;
}

}  // namespace lsm::fixtures
