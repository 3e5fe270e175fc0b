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

#include <algorithm>
#include <cstdio>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsm/metric.hpp"
#include "lsm/perf.hpp"
#include "lsm/scenario_io.hpp"
#include "lsm/sensor.hpp"

namespace lsm {

/// Per-scenario statistics: S averaged per frame, P/R/F1 pooled over the
/// summed TP/FP/FN of all frames.
struct ScenarioSummary {
  std::string scenario_name;
  double safety_mean = 0.0;
  double safety_min = 0.0;
  double safety_max = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t frame_count = 0;
  std::size_t no_detection_count = 0;
  std::size_t error_count = 0;
};

inline ScenarioSummary aggregate(std::span<const FrameResult> frames, std::string name = {}) {
  if (frames.empty()) throw std::invalid_argument("cannot aggregate an empty result list");
  ScenarioSummary s;
  s.scenario_name = std::move(name);
  s.frame_count = frames.size();
  s.safety_min = std::numeric_limits<double>::infinity();
  s.safety_max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  PerfResult pooled;
  for (const auto& f : frames) {
    sum += f.safety.S;
    s.safety_min = std::min(s.safety_min, f.safety.S);
    s.safety_max = std::max(s.safety_max, f.safety.S);
    s.no_detection_count += f.safety.no_detection ? 1 : 0;
    s.error_count += f.safety.error ? 1 : 0;
    pooled.tp += f.perf.tp;
    pooled.fp += f.perf.fp;
    pooled.fn += f.perf.fn;
  }
  // Keep mean within [min, max] despite rounding in the sum.
  s.safety_mean = std::clamp(sum / static_cast<double>(frames.size()), s.safety_min, s.safety_max);
  pooled = with_ratios(pooled);
  s.precision = pooled.precision;
  s.recall = pooled.recall;
  s.f1 = pooled.f1;
  return s;
}

/// The recorded frames, or frames synthesized from trajectory + sensor.
inline std::vector<DetectionFrame> materialize_frames(const ScenarioFile& sf) {
  if (sf.has_frames()) return sf.frames();
  const auto& syn = sf.synthetic();
  return sense_sequence(sf.gt_lane, syn.trajectory, syn.sensor);
}

inline FrameResult evaluate_detection(const DetectionFrame& frame, const Lane& lane, const EvalConfig& cfg) {
  FrameResult r;
  r.frame_index = frame.frame_index;
  r.safety = evaluate_frame(frame, lane, cfg);
  r.perf = match_frame(frame, lane, cfg, r.safety.d_long);
  return r;
}

/// Safety and performance results for every frame, ordered by frame index.
inline std::vector<FrameResult> evaluate_scenario(const ScenarioFile& sf) {
  const auto frames = materialize_frames(sf);
  std::vector<FrameResult> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(evaluate_detection(f, sf.gt_lane, sf.eval_config));
  std::stable_sort(out.begin(), out.end(),
                   [](const FrameResult& a, const FrameResult& b) { return a.frame_index < b.frame_index; });
  return out;
}

inline std::vector<ResultRow> result_rows(std::span<const FrameResult> frames) {
  std::vector<ResultRow> rows;
  rows.reserve(frames.size());
  for (const auto& f : frames) rows.push_back(f.row());
  return rows;
}

inline std::string format_summary(const ScenarioSummary& s) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "scenario: %s\n"
                "frames: %zu (no detection: %zu, errors: %zu)\n"
                "safety S: mean %.4f  min %.4f  max %.4f  (%s)\n"
                "precision %.4f  recall %.4f  f1 %.4f\n",
                s.scenario_name.c_str(), s.frame_count, s.no_detection_count, s.error_count, s.safety_mean,
                s.safety_min, s.safety_max, std::string(to_string(classify(s.safety_mean))).c_str(), s.precision,
                s.recall, s.f1);
  return buf;
}

}  // namespace lsm
