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

// Lane Safety Metric.
//
// A frame is scored from three partial scores:
//
//   s_long  longitudinal: is the detected range long enough to brake to a
//           stop (with reaction delay and a safety margin)? If not, the
//           residual speed at the end of the detection is mapped to a
//           severity score.
//   s_lat   lateral: how far does the detected centerline stray from the
//           ground-truth centerline, relative to the usable part of the
//           lateral tolerance? 1.0 on the centerline, falling linearly to
//           0.8 at the limit. A persistent violation pins s_lat to 0.8.
//   s_scen  scenario: only evaluated when s_lat hits 0.8; the impact speed
//           against whatever occupies the adjacent lane on the departed
//           side, mapped through the same severity table.
//
// The final score S is min(s_long, s_lat) while the lateral score is above
// 0.8 and min(s_long, s_scen) otherwise.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lsm/geometry.hpp"
#include "lsm/lane.hpp"

namespace lsm {

/// Invalid evaluation input (configuration, ego state vs. lane).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EvalConfig {
  double t_delay = 0.1;              // s, processing delay before braking starts
  double braking_decel = 7.5;        // m/s^2
  double x_lat = 0.0;                // m, desired offset, positive toward the left boundary
  double safety_margin_long = 1.1;   // multiplier on the stopping distance
  double lat_usable_fraction = 0.8;  // share of the lateral tolerance that may be used
  double tp_threshold = 0.10;        // m
  double sample_spacing = 0.10;      // m

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(t_delay) || t_delay < 0.0) throw InputError("t_delay must be >= 0");
    if (!finite(braking_decel) || braking_decel <= 0.0) throw InputError("braking deceleration must be > 0");
    if (!finite(x_lat)) throw InputError("x_lat must be finite");
    if (!finite(safety_margin_long) || safety_margin_long < 1.0) {
      throw InputError("safety_margin_long must be >= 1");
    }
    if (!finite(lat_usable_fraction) || lat_usable_fraction <= 0.0 || lat_usable_fraction > 1.0) {
      throw InputError("lat_usable_fraction must be in (0, 1]");
    }
    if (!finite(tp_threshold) || tp_threshold <= 0.0) throw InputError("tp_threshold must be > 0");
    if (!finite(sample_spacing) || sample_spacing <= 0.0) throw InputError("sample_spacing must be > 0");
  }

  bool operator==(const EvalConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Severity

enum class UserClass { Vehicle, VRU };

/// Impact-speed band edges (m/s) and the score reached at each edge. Scores
/// fall linearly inside a band; above the last edge the score is 0.
inline constexpr std::array<double, 4> kVehicleBandEdges{0.0, 8.3, 13.9, 16.7};
inline constexpr std::array<double, 4> kVruBandEdges{0.0, 3.0, 8.3, 11.1};
inline constexpr std::array<double, 4> kBandEdgeScores{0.8, 0.6, 0.4, 0.2};

inline double severity_score(double v_impact, UserClass user_class) {
  const auto& edges = user_class == UserClass::VRU ? kVruBandEdges : kVehicleBandEdges;
  if (!(v_impact > 0.0)) return kBandEdgeScores[0];
  if (v_impact > edges.back()) return 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (v_impact <= edges[i]) {
      const double t = (v_impact - edges[i - 1]) / (edges[i] - edges[i - 1]);
      return std::lerp(kBandEdgeScores[i - 1], kBandEdgeScores[i], t);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Longitudinal

/// Stopping distance including reaction delay, times the safety margin.
inline double required_range(const EgoState& ego, const EvalConfig& cfg) {
  const double v = ego.v0;
  return cfg.safety_margin_long * (v * cfg.t_delay + v * v / (2.0 * cfg.braking_decel));
}

inline double detection_range(const Polyline3& left, const Polyline3& right) {
  return std::min(arc_length(left), arc_length(right));
}

/// Speed left after braking over d_det; 0 when the vehicle stops in time.
inline double remaining_velocity(double v0, double a, double d_det) {
  return std::sqrt(std::max(0.0, v0 * v0 - 2.0 * a * d_det));
}

struct LongitudinalScore {
  double s_long = 0.0;
  double v_r = 0.0;
};

inline LongitudinalScore longitudinal_score(const EgoState& ego, const EvalConfig& cfg, double d_det) {
  if (d_det >= required_range(ego, cfg)) return {1.0, 0.0};
  const double v_r = remaining_velocity(ego.v0, cfg.braking_decel, d_det);
  // Margin violated but the vehicle still stops: top of the collision scale.
  if (v_r == 0.0) return {kBandEdgeScores[0], 0.0};
  return {severity_score(v_r, UserClass::Vehicle), v_r};
}

// ---------------------------------------------------------------------------
// Lateral

/// Tolerable deviation of the detected centerline toward each boundary.
struct LateralThreshold {
  double left = 0.0;
  double right = 0.0;

  double for_side(Side s) const { return s == Side::Left ? left : right; }
  double toward() const { return std::min(left, right); }
  double against() const { return std::max(left, right); }
};

inline LateralThreshold lateral_threshold(double lane_width, double vehicle_width, double x_lat) {
  if (!(lane_width > vehicle_width)) {
    throw InputError("vehicle wider than lane: vehicle width " + std::to_string(vehicle_width) +
                     " m must be smaller than lane width " + std::to_string(lane_width) +
                     " m for a positive lateral tolerance");
  }
  const double base = (lane_width - vehicle_width) / 2.0;
  LateralThreshold th{base - x_lat, base + x_lat};
  if (!(th.toward() > 0.0)) {
    throw InputError("desired lateral offset " + std::to_string(x_lat) +
                     " m leaves no tolerance (half free width " + std::to_string(base) + " m)");
  }
  return th;
}

struct DeviationSample {
  double s = 0.0;      // m along the detected centerline
  double d_lat = 0.0;  // m to the closest ground-truth centerline point
  Side side = Side::Left;

  bool operator==(const DeviationSample&) const = default;
};

struct DeviationProfile {
  std::vector<DeviationSample> samples;
  double spacing = 0.1;

  bool operator==(const DeviationProfile&) const = default;
};

/// Samples the detected centerline every `spacing` meters and measures each
/// sample against the ground-truth centerline. The side is the closer GT
/// boundary.
inline DeviationProfile deviation_profile(const Polyline3& det_center, const Polyline3& gt_center,
                                          const Polyline3& gt_left, const Polyline3& gt_right,
                                          double spacing) {
  DeviationProfile profile;
  profile.spacing = spacing;
  const auto pts = sample_range(det_center, 0.0, det_center.length(), spacing);
  profile.samples.reserve(pts.size());
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) s += distance(pts[i - 1], pts[i]);
    const double d_lat = closest_point(gt_center, pts[i]).distance;
    const double to_left = closest_point(gt_left, pts[i]).distance;
    const double to_right = closest_point(gt_right, pts[i]).distance;
    profile.samples.push_back({s, d_lat, to_left < to_right ? Side::Left : Side::Right});
  }
  return profile;
}

struct ViolationRun {
  double s_start = 0.0;
  double s_end = 0.0;
  Side side = Side::Left;

  bool operator==(const ViolationRun&) const = default;
};

/// Maximal runs of consecutive samples (on one side) whose deviation exceeds
/// limit(sample), kept when their sample coverage (s_end - s_start + spacing)
/// reaches d_min.
template <typename LimitFn>
std::vector<ViolationRun> violation_runs(const DeviationProfile& profile, LimitFn&& limit, double d_min) {
  const auto& smp = profile.samples;
  auto violating = [&](std::size_t i) { return smp[i].d_lat > limit(smp[i]); };
  std::vector<ViolationRun> runs;
  std::size_t i = 0;
  while (i < smp.size()) {
    if (!violating(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < smp.size() && violating(j + 1) && smp[j + 1].side == smp[i].side) ++j;
    const double extent = smp[j].s - smp[i].s + profile.spacing;
    if (extent + 1e-9 >= d_min) runs.push_back({smp[i].s, smp[j].s, smp[i].side});
    i = j + 1;
  }
  return runs;
}

inline std::vector<ViolationRun> violation_runs(const DeviationProfile& profile, double threshold, double d_min) {
  return violation_runs(profile, [threshold](const DeviationSample&) { return threshold; }, d_min);
}

inline constexpr double kLateralSentinel = 0.8;

struct LateralScore {
  double s_lat = 1.0;
  std::vector<ViolationRun> runs;
  double usage = 0.0;  // d_eff / limit in [0, 1]; 1 when sentinel fires
};

/// Below the sentinel, the score reflects the largest deviation level that
/// persists for at least d_min = t_delay * v0: samples over the limit that
/// do not form a run are dropped as outliers, then the maximum over windows
/// of ceil(d_min / spacing) consecutive samples of the window minimum of
/// d_lat / limit is taken.
inline LateralScore lateral_score(const DeviationProfile& profile, const LateralThreshold& th,
                                  const EvalConfig& cfg, double v0) {
  LateralScore out;
  const auto& smp = profile.samples;
  if (smp.empty()) return out;

  auto limit = [&](const DeviationSample& x) { return cfg.lat_usable_fraction * th.for_side(x.side); };
  const double coverage = smp.back().s - smp.front().s + profile.spacing;
  const double d_min = std::min(cfg.t_delay * v0, coverage);

  out.runs = violation_runs(profile, limit, d_min);
  if (!out.runs.empty()) {
    out.s_lat = kLateralSentinel;
    out.usage = 1.0;
    return out;
  }

  std::vector<double> ratio;
  ratio.reserve(smp.size());
  for (const auto& x : smp) {
    const double lim = limit(x);
    if (x.d_lat <= lim) ratio.push_back(x.d_lat / lim);
  }
  double usage = 1.0;
  if (!ratio.empty()) {
    auto window = static_cast<std::size_t>(std::ceil(d_min / profile.spacing - 1e-9));
    window = std::clamp<std::size_t>(window, 1, ratio.size());
    // Sliding-window minimum, maximized over window positions.
    std::deque<std::size_t> mins;
    usage = 0.0;
    for (std::size_t i = 0; i < ratio.size(); ++i) {
      while (!mins.empty() && ratio[mins.back()] >= ratio[i]) mins.pop_back();
      mins.push_back(i);
      if (mins.front() + window <= i) mins.pop_front();
      if (i + 1 >= window) usage = std::max(usage, ratio[mins.front()]);
    }
  }
  out.usage = std::clamp(usage, 0.0, 1.0);
  out.s_lat = 1.0 - (1.0 - kLateralSentinel) * out.usage;
  // Exactly at the limit is still not a violation; keep s_lat above the sentinel.
  if (out.s_lat <= kLateralSentinel) out.s_lat = std::nextafter(kLateralSentinel, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Scenario semantics

struct Impact {
  double v_impact = 0.0;
  UserClass user_class = UserClass::Vehicle;
};

/// Relative speed between the ego vehicle and traffic in the adjacent lane
/// moving at its speed limit, the two headings separated by angle_deg.
inline Impact impact_velocity(double ego_v, const AdjacentLaneInfo& adj) {
  const bool vehicle_lane =
      adj.kind == AdjacentKind::SameDirection || adj.kind == AdjacentKind::OppositeDirection;
  const double v_adj = vehicle_lane ? adj.speed_limit : 0.0;
  const double cos_angle = std::cos(adj.angle_deg * std::numbers::pi / 180.0);
  const double sq = ego_v * ego_v + v_adj * v_adj - 2.0 * ego_v * v_adj * cos_angle;
  return {std::sqrt(std::max(0.0, sq)),
          adj.kind == AdjacentKind::VRUs ? UserClass::VRU : UserClass::Vehicle};
}

inline double scenario_score(const EgoState& ego, Side departed_side, const LaneContext& ctx) {
  const Impact impact = impact_velocity(ego.v0, ctx.adjacent(departed_side));
  return severity_score(impact.v_impact, impact.user_class);
}

// ---------------------------------------------------------------------------
// Composition

inline double final_score(double s_long, double s_lat, double s_scen) {
  const double s = s_lat > kLateralSentinel ? std::min(s_long, s_lat) : std::min(s_long, s_scen);
  return std::clamp(s, 0.0, 1.0);
}

enum class Classification { Insufficient, VeryBad, Bad, Good, VeryGood };

inline Classification classify(double score) {
  if (score <= 0.2) return Classification::Insufficient;
  if (score <= 0.4) return Classification::VeryBad;
  if (score <= 0.6) return Classification::Bad;
  if (score <= 0.8) return Classification::Good;
  return Classification::VeryGood;
}

constexpr std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Insufficient: return "insufficient";
    case Classification::VeryBad: return "very_bad";
    case Classification::Bad: return "bad";
    case Classification::Good: return "good";
    case Classification::VeryGood: return "very_good";
  }
  return "insufficient";
}

inline std::optional<Classification> parse_classification(std::string_view s) {
  for (auto c : {Classification::Insufficient, Classification::VeryBad, Classification::Bad,
                 Classification::Good, Classification::VeryGood}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

struct SafetyResult {
  double s_long = 0.0;
  double s_lat = 0.0;
  std::optional<double> s_scen;  // only when the lateral sentinel fired
  double S = 0.0;
  double d_long = 0.0;
  double d_det = 0.0;
  double v_r = 0.0;
  std::vector<ViolationRun> violation_runs;
  DeviationProfile profile;
  Classification classification = Classification::Insufficient;
  bool no_detection = false;
  std::optional<std::string> error;
};

/// Scores one frame. Fewer than two detected boundaries, or unusable
/// detected geometry, scores 0. Configuration and ego/lane mismatches throw
/// InputError.
inline SafetyResult evaluate_frame(const DetectionFrame& frame, const Lane& gt_lane, const LaneContext& ctx,
                                   const EvalConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(frame.ego.v0) || frame.ego.v0 < 0.0) throw InputError("ego speed must be finite and >= 0");
  const LateralThreshold th = lateral_threshold(ctx.lane_width, frame.ego.vehicle_width, cfg.x_lat);

  SafetyResult r;
  r.d_long = required_range(frame.ego, cfg);
  if (frame.geometry_error) {
    r.no_detection = true;
    r.error = frame.geometry_error;
    return r;
  }
  if (!frame.left || !frame.right) {
    r.no_detection = true;
    return r;
  }
  try {
    const Polyline3 det_center = centerline(*frame.left, *frame.right, cfg.sample_spacing);
    const Polyline3 gt_center = centerline(gt_lane.left_boundary, gt_lane.right_boundary, cfg.sample_spacing);

    r.d_det = detection_range(*frame.left, *frame.right);
    const LongitudinalScore lon = longitudinal_score(frame.ego, cfg, r.d_det);
    r.s_long = lon.s_long;
    r.v_r = lon.v_r;

    r.profile = deviation_profile(det_center, gt_center, gt_lane.left_boundary, gt_lane.right_boundary,
                                  cfg.sample_spacing);
    LateralScore lat = lateral_score(r.profile, th, cfg, frame.ego.v0);
    r.s_lat = lat.s_lat;
    r.violation_runs = std::move(lat.runs);

    if (!r.violation_runs.empty()) {
      double worst = 1.0;
      for (const auto& run : r.violation_runs) worst = std::min(worst, scenario_score(frame.ego, run.side, ctx));
      r.s_scen = worst;
    }
    r.S = final_score(r.s_long, r.s_lat, r.s_scen.value_or(0.0));
    r.classification = classify(r.S);
  } catch (const GeometryError& e) {
    SafetyResult failed;
    failed.d_long = r.d_long;
    failed.no_detection = true;
    failed.error = std::string("geometry: ") + e.what();
    return failed;
  }
  return r;
}

inline SafetyResult evaluate_frame(const DetectionFrame& frame, const Lane& gt_lane, const EvalConfig& cfg) {
  return evaluate_frame(frame, gt_lane, gt_lane.context, cfg);
}

}  // namespace lsm
