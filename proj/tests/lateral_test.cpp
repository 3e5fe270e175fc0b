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

// Deviation profiles, violation runs and the lateral score.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lsm/metric.hpp"
#include "test_support.hpp"

using namespace lsm;
using lsm::testing::profile_of;
using lsm::testing::straight;

namespace {

const LateralThreshold kTh{0.75, 0.75};  // 3.5 m lane, 2.0 m vehicle
constexpr double kLimit = 0.6;           // 0.8 * th_lat

// Brute-force oracle for the below-sentinel usage: drop violating samples,
// then the best k-window of window minima.
double usage_oracle(const std::vector<double>& d, double limit, std::size_t k) {
  std::vector<double> r;
  for (double x : d) {
    if (x <= limit) r.push_back(x / limit);
  }
  if (r.empty()) return 1.0;
  k = std::clamp<std::size_t>(k, 1, r.size());
  double best = 0.0;
  for (std::size_t i = 0; i + k <= r.size(); ++i) {
    best = std::max(best, *std::min_element(r.begin() + static_cast<long>(i), r.begin() + static_cast<long>(i + k)));
  }
  return best;
}

}  // namespace

TEST(DeviationProfile, ParallelOffset) {
  const auto gt_l = straight(0, 100, 1.75);
  const auto gt_r = straight(0, 100, -1.75);
  const auto gt_c = centerline(gt_l, gt_r, 0.1);
  const auto det_c = straight(0, 20, -0.15);
  const auto p = deviation_profile(det_c, gt_c, gt_l, gt_r, 0.1);
  ASSERT_EQ(p.samples.size(), 201u);
  for (const auto& s : p.samples) {
    EXPECT_NEAR(s.d_lat, 0.15, 1e-12);
    EXPECT_EQ(s.side, Side::Right);
  }
  EXPECT_NEAR(p.samples.back().s, 20.0, 1e-9);
}

TEST(DeviationProfile, SideFollowsCloserBoundary) {
  const auto gt_l = straight(0, 100, 1.75);
  const auto gt_r = straight(0, 100, -1.75);
  const auto gt_c = centerline(gt_l, gt_r, 0.1);
  Polyline3 det({{0, 0.3, 0}, {10, 0.3, 0}, {10.1, -0.3, 0}, {20, -0.3, 0}});
  const auto p = deviation_profile(det, gt_c, gt_l, gt_r, 0.1);
  EXPECT_EQ(p.samples.front().side, Side::Left);
  EXPECT_EQ(p.samples.back().side, Side::Right);
}

TEST(ViolationRuns, MinimumLengthFilter) {
  // 0.1 m spacing; five violating samples cover 0.5 m.
  std::vector<double> d(50, 0.1);
  for (int i = 10; i < 15; ++i) d[i] = 0.9;
  const auto p = profile_of(d);
  EXPECT_EQ(violation_runs(p, kLimit, 0.5).size(), 1u);
  EXPECT_TRUE(violation_runs(p, kLimit, 0.51).empty());
  const auto runs = violation_runs(p, kLimit, 0.3);
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_NEAR(runs[0].s_start, 1.0, 1e-12);
  EXPECT_NEAR(runs[0].s_end, 1.4, 1e-12);
}

TEST(ViolationRuns, ExactlyAtLimitIsNotViolation) {
  const auto p = profile_of(std::vector<double>(50, kLimit));
  EXPECT_TRUE(violation_runs(p, kLimit, 0.1).empty());
}

TEST(ViolationRuns, SplitBySide) {
  auto p = profile_of(std::vector<double>(20, 0.9));
  for (std::size_t i = 10; i < 20; ++i) p.samples[i].side = Side::Left;
  const auto runs = violation_runs(p, kLimit, 0.5);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].side, Side::Right);
  EXPECT_EQ(runs[1].side, Side::Left);
  EXPECT_TRUE(violation_runs(p, kLimit, 1.1).empty());
}

TEST(LateralScore, CleanProfileLinearInUsage) {
  EvalConfig cfg;
  const double th = kTh.left;
  for (double frac : {0.0, 0.1, 0.2, 0.5}) {
    const auto p = profile_of(std::vector<double>(400, frac * th));
    const auto s = lateral_score(p, kTh, cfg, 13.89);
    EXPECT_TRUE(s.runs.empty());
    EXPECT_NEAR(s.s_lat, 1.0 - 0.2 * (frac * th / kLimit), 1e-12) << frac;
  }
  const auto c3 = lateral_score(profile_of(std::vector<double>(400, 0.2 * th)), kTh, cfg, 13.89);
  EXPECT_NEAR(c3.s_lat, 0.95, 1e-12);
  const auto cs = lateral_score(profile_of(std::vector<double>(400, 0.1 * th)), kTh, cfg, 13.89);
  EXPECT_NEAR(cs.s_lat, 0.975, 1e-12);
}

TEST(LateralScore, AtLimitStaysAboveSentinel) {
  EvalConfig cfg;
  const auto s = lateral_score(profile_of(std::vector<double>(400, kLimit)), kTh, cfg, 13.89);
  EXPECT_TRUE(s.runs.empty());
  EXPECT_GT(s.s_lat, kLateralSentinel);
  EXPECT_LT(s.s_lat, kLateralSentinel + 1e-12);
}

TEST(LateralScore, PersistentViolationFiresSentinel) {
  EvalConfig cfg;
  std::vector<double> d(400, 0.05);
  for (int i = 200; i < 300; ++i) d[i] = 1.8;
  const auto s = lateral_score(profile_of(d), kTh, cfg, 13.89);
  EXPECT_EQ(s.s_lat, kLateralSentinel);
  ASSERT_EQ(s.runs.size(), 1u);
  EXPECT_EQ(s.runs[0].side, Side::Right);
}

TEST(LateralScore, ShortSpikeIgnored) {
  // d_min = 1.389 m at 13.89 m/s; a 1.0 m spike is too short.
  EvalConfig cfg;
  std::vector<double> d(400, 0.075);
  for (int i = 100; i < 110; ++i) d[i] = 2.0;
  const auto s = lateral_score(profile_of(d), kTh, cfg, 13.89);
  EXPECT_TRUE(s.runs.empty());
  EXPECT_NEAR(s.s_lat, 0.975, 1e-12);
}

TEST(LateralScore, ZeroSpeedCountsEverySampleAsRun) {
  // d_min = 0 at standstill: any violation persists long enough.
  EvalConfig cfg;
  std::vector<double> d(50, 0.0);
  d[20] = 0.7;
  EXPECT_EQ(lateral_score(profile_of(d), kTh, cfg, 0.0).s_lat, kLateralSentinel);
}

TEST(LateralScore, DminClampedToCoverage) {
  // 2 m profile at 30 m/s (d_min 3 m): a full-length violation still counts.
  EvalConfig cfg;
  const auto s = lateral_score(profile_of(std::vector<double>(20, 0.9)), kTh, cfg, 30.0);
  EXPECT_EQ(s.s_lat, kLateralSentinel);
}

TEST(LateralScore, AsymmetricThresholdPerSide) {
  EvalConfig cfg;
  cfg.x_lat = 0.25;
  const auto th = lateral_threshold(3.5, 2.0, cfg.x_lat);  // left 0.5, right 1.0
  // 0.5 m is over 0.8 * 0.5 on the left but under 0.8 * 1.0 on the right.
  const auto left = lateral_score(profile_of(std::vector<double>(100, 0.5), 0.1, Side::Left), th, cfg, 10.0);
  const auto right = lateral_score(profile_of(std::vector<double>(100, 0.5), 0.1, Side::Right), th, cfg, 10.0);
  EXPECT_EQ(left.s_lat, kLateralSentinel);
  EXPECT_NEAR(right.s_lat, 1.0 - 0.2 * 0.5 / 0.8, 1e-12);
}

TEST(LateralScore, MatchesBruteForceOracle) {
  EvalConfig cfg;
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> dev(0.0, 0.55);
  std::uniform_real_distribution<double> v(1.0, 30.0);
  std::uniform_int_distribution<int> n(5, 300);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> d(static_cast<std::size_t>(n(rng)));
    for (auto& x : d) x = dev(rng);
    const double v0 = v(rng);
    const auto p = profile_of(d);
    const double coverage = 0.1 * static_cast<double>(d.size());
    const double d_min = std::min(0.1 * v0, coverage);
    const auto k = static_cast<std::size_t>(std::ceil(d_min / 0.1 - 1e-9));
    const auto s = lateral_score(p, kTh, cfg, v0);
    EXPECT_NEAR(s.s_lat, std::max(1.0 - 0.2 * usage_oracle(d, kLimit, k), std::nextafter(0.8, 1.0)), 1e-12);
  }
}

TEST(LateralScore, OutlierInjectionNeverChangesScore) {
  // Insert one violating sample into a clean profile with d_min > spacing.
  EvalConfig cfg;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> dev(0.0, kLimit);
  std::uniform_real_distribution<double> spike(kLimit + 1e-6, 5.0);
  std::uniform_real_distribution<double> v(1.5, 40.0);
  std::uniform_int_distribution<int> n(20, 400);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> d(static_cast<std::size_t>(n(rng)));
    for (auto& x : d) x = dev(rng);
    const double v0 = v(rng);
    ASSERT_GT(cfg.t_delay * v0, cfg.sample_spacing);
    const auto clean = lateral_score(profile_of(d), kTh, cfg, v0);
    std::uniform_int_distribution<std::size_t> pos(0, d.size());
    auto dirty = d;
    dirty.insert(dirty.begin() + static_cast<long>(pos(rng)), spike(rng));
    const auto injected = lateral_score(profile_of(dirty), kTh, cfg, v0);
    EXPECT_EQ(clean.s_lat, injected.s_lat) << "trial " << trial;
    EXPECT_TRUE(injected.runs.empty());
  }
}

TEST(LateralScore, MonotoneUnderUniformScaling) {
  EvalConfig cfg;
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> dev(0.0, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> d(200);
    for (auto& x : d) x = dev(rng);
    auto bigger = d;
    for (auto& x : bigger) x *= 1.5;
    EXPECT_GE(lateral_score(profile_of(d), kTh, cfg, 13.89).s_lat,
              lateral_score(profile_of(bigger), kTh, cfg, 13.89).s_lat);
  }
}
