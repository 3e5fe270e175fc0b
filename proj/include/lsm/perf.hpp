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

// Point-wise precision / recall / F1 over resampled lane boundaries.
//
// Detected points are TP when some ground-truth sample of the same boundary
// lies within tp_threshold, FP otherwise. Ground-truth samples between the
// ego's projection and d_long further along are "required"; each one with no
// detected point within tp_threshold is a FN. Matching is any-within-
// threshold, not one-to-one.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lsm/geometry.hpp"
#include "lsm/metric.hpp"

namespace lsm {

struct PerfResult {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const PerfResult&) const = default;
};

inline double f1(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

/// Fills precision/recall/f1 from the counts.
inline PerfResult with_ratios(PerfResult r) {
  const double tp = static_cast<double>(r.tp);
  r.precision = r.tp + r.fp > 0 ? tp / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? tp / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = f1(r.precision, r.recall);
  return r;
}

namespace detail {

// Hash grid over a point set with cell size equal to the query radius, so a
// radius query only touches the 27 neighbouring cells.
class PointGrid {
 public:
  PointGrid(std::span<const Point3> pts, double radius) : pts_(pts), cell_(radius), r_sq_(radius * radius) {
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(cell_of(pts[i]))].push_back(i);
  }

  bool any_within(const Point3& q) const {
    const auto c = cell_of(q);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells_.end()) continue;
          for (std::size_t i : it->second) {
            if (squared_distance(pts_[i], q) <= r_sq_) return true;
          }
        }
      }
    }
    return false;
  }

 private:
  using Cell = std::array<std::int64_t, 3>;

  Cell cell_of(const Point3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / cell_)), static_cast<std::int64_t>(std::floor(p.y / cell_)),
            static_cast<std::int64_t>(std::floor(p.z / cell_))};
  }
  static std::uint64_t key(const Cell& c) {
    auto mix = [](std::uint64_t h, std::int64_t v) {
      h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      return h;
    };
    return mix(mix(mix(0, c[0]), c[1]), c[2]);
  }

  std::span<const Point3> pts_;
  double cell_;
  double r_sq_;
  // Colliding keys merge buckets, which only adds candidates.
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace detail

/// Counts for one detected boundary against its ground-truth boundary.
inline PerfResult match_boundary(const std::optional<Polyline3>& det, const Polyline3& gt, const Point3& ego_origin,
                                 const EvalConfig& cfg, double d_long) {
  if (!(cfg.tp_threshold > 0.0)) throw InputError("tp_threshold must be > 0");
  const auto gt_pts = resample(gt, cfg.sample_spacing);
  const double s_ego = closest_point(gt, ego_origin).s;

  PerfResult r;
  std::vector<Point3> det_pts;
  if (det) {
    const auto resampled = resample(*det, cfg.sample_spacing);
    det_pts.assign(resampled.points().begin(), resampled.points().end());
    const detail::PointGrid gt_grid(gt_pts.points(), cfg.tp_threshold);
    for (const auto& p : det_pts) (gt_grid.any_within(p) ? r.tp : r.fp) += 1;
  }
  const detail::PointGrid det_grid(det_pts, cfg.tp_threshold);
  const auto pts = gt_pts.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // Arc position of the sample on the source boundary.
    const double s = i + 1 == pts.size() ? gt.length() : static_cast<double>(i) * cfg.sample_spacing;
    const double ahead = s - s_ego;
    if (ahead < 0.0 || ahead > d_long) continue;
    if (!det_grid.any_within(pts[i])) r.fn += 1;
  }
  return r;
}

/// Pairs det[i] with gt[i] (left with left, right with right) and pools the
/// counts. Absent detections contribute only false negatives.
inline PerfResult match_boundaries(std::span<const std::optional<Polyline3>> det, std::span<const Polyline3> gt,
                                   const Point3& ego_origin, const EvalConfig& cfg, double d_long) {
  if (det.size() != gt.size()) throw InputError("detected and ground-truth boundary counts differ");
  PerfResult total;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const PerfResult r = match_boundary(det[i], gt[i], ego_origin, cfg, d_long);
    total.tp += r.tp;
    total.fp += r.fp;
    total.fn += r.fn;
  }
  return with_ratios(total);
}

inline PerfResult match_frame(const DetectionFrame& frame, const Lane& lane, const EvalConfig& cfg, double d_long) {
  const std::optional<Polyline3> det[] = {frame.left, frame.right};
  const Polyline3 gt[] = {lane.left_boundary, lane.right_boundary};
  return match_boundaries(det, gt, frame.ego_origin, cfg, d_long);
}

}  // namespace lsm
