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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lsm/fixtures.hpp"
#include "lsm/metric.hpp"
#include "test_support.hpp"

using namespace lsm;
using lsm::testing::straight;

namespace {

EvalConfig defaults() { return EvalConfig{}; }

// Independent piecewise-linear oracle over explicit (v, score) knots.
double band_oracle(double v, const double (&knots)[4]) {
  const double scores[4] = {0.8, 0.6, 0.4, 0.2};
  if (v <= 0.0) return 0.8;
  if (v > knots[3]) return 0.0;
  int i = 1;
  while (v > knots[i]) ++i;
  const double t = (v - knots[i - 1]) / (knots[i] - knots[i - 1]);
  return scores[i - 1] + t * (scores[i] - scores[i - 1]);
}

DetectionFrame frame_with(double v0, Polyline3 left, Polyline3 right) {
  DetectionFrame f;
  f.ego = {v0, 2.0};
  f.left = std::move(left);
  f.right = std::move(right);
  return f;
}

}  // namespace

TEST(EvalConfig, DefaultsAndValidation) {
  const EvalConfig c;
  EXPECT_DOUBLE_EQ(c.t_delay, 0.1);
  EXPECT_DOUBLE_EQ(c.braking_decel, 7.5);
  EXPECT_DOUBLE_EQ(c.safety_margin_long, 1.1);
  EXPECT_DOUBLE_EQ(c.lat_usable_fraction, 0.8);
  EXPECT_DOUBLE_EQ(c.tp_threshold, 0.1);
  EXPECT_DOUBLE_EQ(c.sample_spacing, 0.1);
  EXPECT_NO_THROW(c.validate());
  EvalConfig bad;
  bad.braking_decel = 0.0;
  EXPECT_THROW(bad.validate(), InputError);
  bad = {};
  bad.sample_spacing = -0.1;
  EXPECT_THROW(bad.validate(), InputError);
  bad = {};
  bad.t_delay = NAN;
  EXPECT_THROW(bad.validate(), InputError);
}

TEST(Severity, PublishedBandEdgesExact) {
  const double veh[] = {0.0, 8.3, 13.9, 16.7};
  const double vru[] = {0.0, 3.0, 8.3, 11.1};
  const double score[] = {0.8, 0.6, 0.4, 0.2};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(severity_score(veh[i], UserClass::Vehicle), score[i]) << veh[i];
    EXPECT_EQ(severity_score(vru[i], UserClass::VRU), score[i]) << vru[i];
  }
}

TEST(Severity, AboveLastEdgeIsZero) {
  EXPECT_EQ(severity_score(16.71, UserClass::Vehicle), 0.0);
  EXPECT_EQ(severity_score(11.11, UserClass::VRU), 0.0);
  EXPECT_EQ(severity_score(17.94, UserClass::Vehicle), 0.0);
  EXPECT_EQ(severity_score(1e9, UserClass::VRU), 0.0);
}

TEST(Severity, InteriorMatchesLinearOracle) {
  const double veh[] = {0.0, 8.3, 13.9, 16.7};
  const double vru[] = {0.0, 3.0, 8.3, 11.1};
  for (double v = 0.0; v <= 30.0; v += 0.037) {
    EXPECT_NEAR(severity_score(v, UserClass::Vehicle), band_oracle(v, veh), 1e-12) << v;
    EXPECT_NEAR(severity_score(v, UserClass::VRU), band_oracle(v, vru), 1e-12) << v;
  }
  EXPECT_NEAR(severity_score(4.15, UserClass::Vehicle), 0.7, 1e-12);
  EXPECT_NEAR(severity_score(5.65, UserClass::VRU), 0.5, 1e-12);
}

TEST(Severity, MonotoneNonIncreasingOnGrid) {
  for (auto uc : {UserClass::Vehicle, UserClass::VRU}) {
    double prev = severity_score(0.0, uc);
    for (int k = 1; k <= 3000; ++k) {
      const double cur = severity_score(0.01 * k, uc);
      EXPECT_LE(cur, prev) << 0.01 * k;
      prev = cur;
    }
  }
}

TEST(Severity, VruNeverMoreLenientThanVehicle) {
  for (int k = 0; k <= 3000; ++k) {
    const double v = 0.01 * k;
    EXPECT_LE(severity_score(v, UserClass::VRU), severity_score(v, UserClass::Vehicle) + 1e-12) << v;
  }
}

TEST(Longitudinal, RequiredRangeUrban) {
  EXPECT_NEAR(required_range({13.89, 2.0}, defaults()), 15.676254, 1e-6);
  EXPECT_NEAR(required_range({27.78, 2.0}, defaults()), 59.649216, 1e-6);
  EXPECT_EQ(required_range({0.0, 2.0}, defaults()), 0.0);
}

TEST(Longitudinal, RequiredRangeExceedsPureBraking) {
  // v^2 / 2a alone is 12.86 m at 13.89 m/s.
  EXPECT_GT(required_range({13.89, 2.0}, defaults()), 12.86214);
}

TEST(Longitudinal, RemainingVelocity) {
  EXPECT_NEAR(remaining_velocity(27.78, 7.5, 30.0), 17.936789010299478, 1e-9);
  EXPECT_NEAR(remaining_velocity(13.89, 7.5, 10.0), 6.55225915238401, 1e-9);
  EXPECT_EQ(remaining_velocity(13.89, 7.5, 15.0), 0.0);
}

TEST(Longitudinal, ScoreRegimes) {
  const auto cfg = defaults();
  const EgoState ego{13.89, 2.0};
  auto full = longitudinal_score(ego, cfg, 40.0);
  EXPECT_EQ(full.s_long, 1.0);
  EXPECT_EQ(full.v_r, 0.0);
  // Short of the margin but still stops.
  auto margin = longitudinal_score(ego, cfg, 14.0);
  EXPECT_EQ(margin.s_long, 0.8);
  EXPECT_EQ(margin.v_r, 0.0);
  auto hit = longitudinal_score(ego, cfg, 10.0);
  EXPECT_NEAR(hit.v_r, 6.55225915238401, 1e-9);
  EXPECT_NEAR(hit.s_long, band_oracle(6.55225915238401, {0.0, 8.3, 13.9, 16.7}), 1e-12);
  auto c1 = longitudinal_score({27.78, 2.0}, cfg, 30.0);
  EXPECT_EQ(c1.s_long, 0.0);
}

TEST(Longitudinal, MonotoneInDetectionRange) {
  const auto cfg = defaults();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> speed(0.5, 40.0);
  for (int trial = 0; trial < 100; ++trial) {
    const EgoState ego{speed(rng), 2.0};
    double prev = -1.0;
    for (double d = 0.0; d < 150.0; d += 0.5) {
      const double s = longitudinal_score(ego, cfg, d).s_long;
      EXPECT_GE(s, prev);
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
      prev = s;
    }
  }
}

TEST(Lateral, ThresholdFromWidths) {
  const auto th = lateral_threshold(3.5, 2.0, 0.0);
  EXPECT_DOUBLE_EQ(th.left, 0.75);
  EXPECT_DOUBLE_EQ(th.right, 0.75);
  const auto shifted = lateral_threshold(3.5, 2.0, 0.25);
  EXPECT_DOUBLE_EQ(shifted.left, 0.5);
  EXPECT_DOUBLE_EQ(shifted.right, 1.0);
  EXPECT_DOUBLE_EQ(shifted.toward(), 0.5);
  EXPECT_DOUBLE_EQ(shifted.against(), 1.0);
}

TEST(Lateral, ThresholdRejectsImpossibleGeometry) {
  EXPECT_THROW(lateral_threshold(2.0, 2.55, 0.0), InputError);
  EXPECT_THROW(lateral_threshold(2.55, 2.55, 0.0), InputError);
  EXPECT_THROW(lateral_threshold(3.5, 2.0, 0.75), InputError);
  EXPECT_THROW(lateral_threshold(3.5, 2.0, -0.8), InputError);
  try {
    lateral_threshold(2.0, 2.55, 0.0);
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("vehicle wider than lane"), std::string::npos);
  }
}

TEST(Lateral, ThresholdMatchesRoadTypeTolerances) {
  // Free width with the widest permitted vehicle, per road type.
  EXPECT_NEAR(2.0 * lateral_threshold(3.25, 2.55, 0.0).left, 0.70, 1e-12);
  EXPECT_NEAR(2.0 * lateral_threshold(3.50, 2.55, 0.0).left, 0.95, 1e-12);
  EXPECT_NEAR(2.0 * lateral_threshold(3.75, 2.55, 0.0).left, 1.20, 1e-12);
}

TEST(Scenario, ImpactVelocityLaw) {
  const AdjacentLaneInfo opposite{AdjacentKind::OppositeDirection, 13.89, 180.0};
  EXPECT_NEAR(impact_velocity(13.89, opposite).v_impact, 27.78, 1e-9);
  const AdjacentLaneInfo same{AdjacentKind::SameDirection, 13.89, 0.0};
  EXPECT_NEAR(impact_velocity(13.89, same).v_impact, 0.0, 1e-9);
  const AdjacentLaneInfo cross{AdjacentKind::SameDirection, 3.0, 90.0};
  EXPECT_NEAR(impact_velocity(4.0, cross).v_impact, 5.0, 1e-9);
  const AdjacentLaneInfo vru{AdjacentKind::VRUs, 5.0, 0.0};
  EXPECT_NEAR(impact_velocity(13.89, vru).v_impact, 13.89, 1e-12);
  EXPECT_EQ(impact_velocity(13.89, vru).user_class, UserClass::VRU);
  const AdjacentLaneInfo none{AdjacentKind::NoLane, 20.0, 0.0};
  EXPECT_NEAR(impact_velocity(10.0, none).v_impact, 10.0, 1e-12);
  EXPECT_EQ(impact_velocity(10.0, none).user_class, UserClass::Vehicle);
}

TEST(Scenario, ScoresPerAdjacentKind) {
  LaneContext ctx;
  ctx.left_adjacent = {AdjacentKind::OppositeDirection, 13.89, 180.0};
  ctx.right_adjacent = {AdjacentKind::VRUs, 0.0, 0.0};
  const EgoState ego{13.89, 2.0};
  EXPECT_EQ(scenario_score(ego, Side::Left, ctx), 0.0);
  EXPECT_EQ(scenario_score(ego, Side::Right, ctx), 0.0);
  ctx.left_adjacent = {AdjacentKind::SameDirection, 13.89, 0.0};
  EXPECT_EQ(scenario_score(ego, Side::Left, ctx), 0.8);
  ctx.right_adjacent = {AdjacentKind::NoLane, 0.0, 0.0};
  EXPECT_NEAR(scenario_score({8.3, 2.0}, Side::Right, ctx), 0.6, 1e-12);
}

TEST(Composition, FinalScore) {
  EXPECT_EQ(final_score(1.0, 0.95, 0.0), 0.95);
  EXPECT_EQ(final_score(0.6, 0.95, 0.0), 0.6);
  EXPECT_EQ(final_score(1.0, 0.8, 0.3), 0.3);
  EXPECT_EQ(final_score(0.2, 0.8, 0.3), 0.2);
}

TEST(Composition, FinalScoreBoundedByComponents) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> lat(0.8, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double sl = u(rng), sa = lat(rng), sc = u(rng);
    const double s = final_score(sl, sa, sc);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_LE(s, sl);
    if (sa > kLateralSentinel) {
      EXPECT_LE(s, sa);
    } else {
      EXPECT_LE(s, sc);
    }
  }
}

TEST(Classification, BandEdges) {
  EXPECT_EQ(classify(0.0), Classification::Insufficient);
  EXPECT_EQ(classify(0.2), Classification::Insufficient);
  EXPECT_EQ(classify(std::nextafter(0.2, 1.0)), Classification::VeryBad);
  EXPECT_EQ(classify(0.4), Classification::VeryBad);
  EXPECT_EQ(classify(std::nextafter(0.4, 1.0)), Classification::Bad);
  EXPECT_EQ(classify(0.6), Classification::Bad);
  EXPECT_EQ(classify(std::nextafter(0.6, 1.0)), Classification::Good);
  EXPECT_EQ(classify(0.8), Classification::Good);
  EXPECT_EQ(classify(std::nextafter(0.8, 1.0)), Classification::VeryGood);
  EXPECT_EQ(classify(1.0), Classification::VeryGood);
}

TEST(Classification, StringRoundTrip) {
  for (auto c : {Classification::Insufficient, Classification::VeryBad, Classification::Bad, Classification::Good,
                 Classification::VeryGood}) {
    EXPECT_EQ(parse_classification(to_string(c)), c);
  }
  EXPECT_FALSE(parse_classification("excellent").has_value());
}

TEST(EvaluateFrame, MissingBoundaryScoresZero) {
  const auto lane = fixtures::straight_lane();
  DetectionFrame f;
  f.ego = {13.89, 2.0};
  f.left = straight(0, 40, 1.75);
  const auto r = evaluate_frame(f, lane, defaults());
  EXPECT_TRUE(r.no_detection);
  EXPECT_EQ(r.S, 0.0);
  EXPECT_EQ(r.d_det, 0.0);
  EXPECT_NEAR(r.d_long, 15.676254, 1e-6);
  EXPECT_EQ(r.classification, Classification::Insufficient);
}

TEST(EvaluateFrame, GeometryErrorFlagPropagates) {
  const auto lane = fixtures::straight_lane();
  DetectionFrame f;
  f.ego = {13.89, 2.0};
  f.geometry_error = "left_boundary: duplicate points";
  const auto r = evaluate_frame(f, lane, defaults());
  EXPECT_TRUE(r.no_detection);
  ASSERT_TRUE(r.error.has_value());
  EXPECT_EQ(r.S, 0.0);
}

TEST(EvaluateFrame, TooShortDetectionReportsError) {
  const auto lane = fixtures::straight_lane();
  const auto r = evaluate_frame(frame_with(13.89, straight(0, 0.05, 1.75), straight(0, 40, -1.75)), lane,
                                defaults());
  EXPECT_TRUE(r.no_detection);
  ASSERT_TRUE(r.error.has_value());
  EXPECT_NE(r.error->find("boundary too short"), std::string::npos);
  EXPECT_EQ(r.S, 0.0);
}

TEST(EvaluateFrame, PerfectDetection) {
  const auto lane = fixtures::straight_lane();
  const auto r = evaluate_frame(frame_with(13.89, straight(0, 40, 1.75), straight(0, 40, -1.75)), lane,
                                defaults());
  EXPECT_FALSE(r.no_detection);
  EXPECT_EQ(r.s_long, 1.0);
  EXPECT_EQ(r.s_lat, 1.0);
  EXPECT_EQ(r.S, 1.0);
  EXPECT_FALSE(r.s_scen.has_value());
  EXPECT_EQ(r.classification, Classification::VeryGood);
}

TEST(EvaluateFrame, CaseOneChain) {
  const auto lane = fixtures::straight_lane();
  const auto r = evaluate_frame(frame_with(27.78, straight(0, 30, 1.75 - 0.075), straight(0, 60, -1.75 - 0.075)),
                                lane, defaults());
  EXPECT_EQ(r.d_det, 30.0);
  EXPECT_NEAR(r.v_r, 17.94, 0.01);
  EXPECT_EQ(r.s_long, 0.0);
  EXPECT_EQ(r.S, 0.0);
}

TEST(EvaluateFrame, VehicleWiderThanLaneThrows) {
  const auto lane = fixtures::straight_lane();
  auto f = frame_with(13.89, straight(0, 40, 1.75), straight(0, 40, -1.75));
  f.ego.vehicle_width = 4.0;
  EXPECT_THROW(evaluate_frame(f, lane, defaults()), InputError);
  f.ego.vehicle_width = 2.0;
  f.ego.v0 = -1.0;
  EXPECT_THROW(evaluate_frame(f, lane, defaults()), InputError);
}

TEST(EvaluateFrame, DepartureRoutesThroughScenario) {
  auto lane = fixtures::straight_lane();
  lane.context.left_adjacent = {AdjacentKind::SameDirection, 13.89, 0.0};
  // Centerline 0.7 m to the left over the whole 40 m: limit is 0.6 m.
  const auto r = evaluate_frame(frame_with(13.89, straight(0, 40, 2.45), straight(0, 40, -1.05)), lane,
                                defaults());
  EXPECT_EQ(r.s_lat, kLateralSentinel);
  ASSERT_TRUE(r.s_scen.has_value());
  EXPECT_EQ(*r.s_scen, 0.8);
  EXPECT_EQ(r.S, 0.8);
  ASSERT_FALSE(r.violation_runs.empty());
  EXPECT_EQ(r.violation_runs.front().side, Side::Left);
}

TEST(EvaluateFrame, ScaleInvariance) {
  // Doubling every length together with v0, a and the time-free thresholds
  // leaves the score unchanged while the range is sufficient.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> off(-0.5, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double o = off(rng);
    auto lane1 = fixtures::straight_lane();
    const auto r1 = evaluate_frame(frame_with(10.0, straight(0, 40, 1.75 + o), straight(0, 40, -1.75 + o)), lane1,
                                   defaults());
    Lane lane2{"ego", straight(0, 800, 3.5), straight(0, 800, -3.5), lane1.context};
    lane2.context.lane_width = 7.0;
    EvalConfig cfg2;
    cfg2.braking_decel = 15.0;
    cfg2.sample_spacing = 0.2;
    cfg2.t_delay = 0.1;
    DetectionFrame f2 = frame_with(20.0, straight(0, 80, 3.5 + 2 * o), straight(0, 80, -3.5 + 2 * o));
    f2.ego.vehicle_width = 4.0;
    const auto r2 = evaluate_frame(f2, lane2, cfg2);
    EXPECT_NEAR(r1.S, r2.S, 1e-9) << o;
    EXPECT_NEAR(r1.s_lat, r2.s_lat, 1e-9) << o;
  }
}

TEST(EvaluateFrame, ScoresStayInUnitInterval) {
  const auto lane = fixtures::straight_lane();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> off(-2.0, 2.0);
  std::uniform_real_distribution<double> len(1.0, 80.0);
  std::uniform_real_distribution<double> spd(0.0, 40.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double o = off(rng);
    const auto r = evaluate_frame(frame_with(spd(rng), straight(0, len(rng), 1.75 + o), straight(0, len(rng), -1.75 + o)),
                                  lane, defaults());
    for (double v : {r.S, r.s_long, r.s_lat}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_LE(r.S, r.s_long);
  }
}
