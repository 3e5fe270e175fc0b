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

// Scenario files (.scenario.json) and result files (.results.csv/.json).
// The schemas are described in docs/formats.md. Field names carry their
// units; speeds may be given in km/h (suffix _kmh) and are converted to m/s
// at parse time.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "lsm/geometry.hpp"
#include "lsm/lane.hpp"
#include "lsm/metric.hpp"
#include "lsm/perf.hpp"
#include "lsm/sensor.hpp"

namespace lsm {

inline constexpr int kSchemaVersion = 1;

/// Reference vehicle width behind the road-type movement tolerances.
inline constexpr double kMaxVehicleWidth = 2.55;

/// Upper bound on samples per boundary at the configured spacing.
inline constexpr double kMaxSamplesPerBoundary = 1e7;

/// Total lateral movement range (both sides) prescribed per road type, m.
inline double lookup_movement_tolerance(RoadType road) {
  switch (road) {
    case RoadType::Urban: return 0.70;
    case RoadType::Rural: return 0.95;
    case RoadType::Motorway: return 1.20;
  }
  return 0.95;
}

struct SyntheticSource {
  std::vector<TrajectoryPoint> trajectory;
  SensorModel sensor;

  bool operator==(const SyntheticSource&) const = default;
};

struct ScenarioFile {
  int schema_version = kSchemaVersion;
  std::string name;
  Lane gt_lane;
  EvalConfig eval_config;
  std::variant<std::vector<DetectionFrame>, SyntheticSource> source;

  bool has_frames() const { return std::holds_alternative<std::vector<DetectionFrame>>(source); }
  const std::vector<DetectionFrame>& frames() const { return std::get<std::vector<DetectionFrame>>(source); }
  const SyntheticSource& synthetic() const { return std::get<SyntheticSource>(source); }

  bool operator==(const ScenarioFile&) const = default;
};

struct Diagnostic {
  std::string path;  // JSON path, e.g. gt_lane.left_boundary[3][1]
  std::string message;
};

struct ParseOptions {
  // Unknown fields and validation warnings become errors.
  bool strict = false;
};

struct ParseResult {
  std::optional<ScenarioFile> scenario;
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  bool ok() const { return scenario.has_value() && errors.empty(); }
};

namespace detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Quotes bare NaN / Infinity / -Infinity tokens so that they reach the
/// validator (and fail with a located finiteness error) instead of failing
/// the JSON tokenizer.
inline std::string quote_non_finite_tokens(std::string_view in) {
  std::string out;
  out.reserve(in.size() + 16);
  bool in_string = false;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < in.size()) {
        out.push_back(in[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    bool replaced = false;
    for (std::string_view tok : {"-Infinity", "Infinity", "NaN"}) {
      if (in.substr(i, tok.size()) == tok) {
        out += '"';
        out += tok;
        out += '"';
        i += tok.size() - 1;
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(c);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(ParseOptions opt) : opt_(opt) {}

  void error(const std::string& path, std::string msg) { errors.push_back({path, std::move(msg)}); }
  void warn(const std::string& path, std::string msg) {
    (opt_.strict ? errors : warnings).push_back({path, std::move(msg)});
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }
  static std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

  bool expect_object(const Json& j, const std::string& path) {
    if (j.is_object()) return true;
    error(path, "expected an object");
    return false;
  }

  void check_keys(const Json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool found = false;
      for (auto k : known) found = found || it.key() == k;
      if (!found) warn(join(path, it.key()), "unknown field");
    }
  }

  std::optional<double> number(const Json& j, const std::string& path) {
    if (j.is_number()) {
      const double v = j.get<double>();
      if (std::isfinite(v)) return v;
    } else if (j.is_string()) {
      const auto& s = j.get_ref<const std::string&>();
      if (s == "NaN" || s == "Infinity" || s == "-Infinity") {
        error(path, "non-finite number (" + s + ")");
        return std::nullopt;
      }
    }
    error(path, "expected a finite number");
    return std::nullopt;
  }

  /// Optional numeric field; returns fallback when absent.
  std::optional<double> field(const Json& obj, std::string_view key, const std::string& path,
                              std::optional<double> fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (!fallback) error(join(path, key), "missing required field");
      return fallback;
    }
    return number(*it, join(path, key));
  }

  /// Speed given as <base>_mps or <base>_kmh (exactly one).
  std::optional<double> speed(const Json& obj, std::string_view base, const std::string& path,
                              std::optional<double> fallback) {
    const std::string mps = std::string(base) + "_mps";
    const std::string kmh = std::string(base) + "_kmh";
    const bool has_mps = obj.contains(mps);
    const bool has_kmh = obj.contains(kmh);
    if (has_mps && has_kmh) {
      error(join(path, base), "give either " + mps + " or " + kmh + ", not both");
      return std::nullopt;
    }
    std::optional<double> v;
    if (has_kmh) {
      v = number(obj.at(kmh), join(path, kmh));
      if (v) *v /= 3.6;
    } else if (has_mps) {
      v = number(obj.at(mps), join(path, mps));
    } else {
      if (!fallback) error(join(path, mps), "missing required field");
      return fallback;
    }
    if (v && *v < 0.0) {
      error(join(path, has_kmh ? kmh : mps), "speed must be >= 0");
      return std::nullopt;
    }
    return v;
  }

  std::optional<Point3> point(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() < 2 || j.size() > 3) {
      error(path, "expected [x, y] or [x, y, z]");
      return std::nullopt;
    }
    double c[3] = {0.0, 0.0, 0.0};
    bool ok = true;
    for (std::size_t k = 0; k < j.size(); ++k) {
      auto v = number(j[k], index(path, k));
      if (v) c[k] = *v;
      ok = ok && v.has_value();
    }
    if (!ok) return std::nullopt;
    return Point3{c[0], c[1], c[2]};
  }

  std::optional<std::vector<Point3>> points(const Json& j, const std::string& path) {
    if (!j.is_array()) {
      error(path, "expected an array of points");
      return std::nullopt;
    }
    std::vector<Point3> out;
    out.reserve(j.size());
    bool ok = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto p = point(j[i], index(path, i));
      if (p) out.push_back(*p);
      ok = ok && p.has_value();
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

 private:
  ParseOptions opt_;
};

inline std::optional<AdjacentLaneInfo> read_adjacent(Reader& rd, const Json& j, const std::string& path) {
  if (!rd.expect_object(j, path)) return std::nullopt;
  rd.check_keys(j, path, {"kind", "speed_limit_mps", "speed_limit_kmh", "angle_deg"});
  AdjacentLaneInfo adj;
  auto kind_it = j.find("kind");
  if (kind_it == j.end() || !kind_it->is_string()) {
    rd.error(Reader::join(path, "kind"), "expected one of same_direction, opposite_direction, vrus, no_lane");
    return std::nullopt;
  }
  auto kind = parse_adjacent_kind(kind_it->get_ref<const std::string&>());
  if (!kind) {
    rd.error(Reader::join(path, "kind"), "unknown adjacent lane kind '" + kind_it->get<std::string>() + "'");
    return std::nullopt;
  }
  adj.kind = *kind;
  const bool vehicle_lane = adj.kind == AdjacentKind::SameDirection || adj.kind == AdjacentKind::OppositeDirection;
  auto limit = rd.speed(j, "speed_limit", path, vehicle_lane ? std::nullopt : std::optional<double>(0.0));
  auto angle = rd.field(j, "angle_deg", path,
                        adj.kind == AdjacentKind::OppositeDirection ? 180.0 : 0.0);
  if (!limit || !angle) return std::nullopt;
  if (!vehicle_lane && *limit != 0.0) {
    rd.error(Reader::join(path, "speed_limit_mps"), "must be 0 for vrus / no_lane");
    return std::nullopt;
  }
  if (*angle < 0.0 || *angle > 180.0) {
    rd.error(Reader::join(path, "angle_deg"), "must be within [0, 180]");
    return std::nullopt;
  }
  adj.speed_limit = *limit;
  adj.angle_deg = *angle;
  return adj;
}

inline std::optional<Polyline3> read_gt_polyline(Reader& rd, const Json& obj, std::string_view key,
                                                 const std::string& path) {
  const std::string p = Reader::join(path, key);
  auto it = obj.find(key);
  if (it == obj.end()) {
    rd.error(p, "missing required field");
    return std::nullopt;
  }
  auto pts = rd.points(*it, p);
  if (!pts) return std::nullopt;
  try {
    return Polyline3(std::move(*pts));
  } catch (const GeometryError& e) {
    rd.error(p, e.what());
    return std::nullopt;
  }
}

inline std::optional<Lane> read_lane(Reader& rd, const Json& j, const std::string& path) {
  if (!rd.expect_object(j, path)) return std::nullopt;
  rd.check_keys(j, path,
                {"id", "width_m", "road_type", "left_boundary", "right_boundary", "left_adjacent", "right_adjacent"});
  std::string id;
  if (auto it = j.find("id"); it != j.end()) {
    if (it->is_string()) {
      id = it->get<std::string>();
    } else {
      rd.error(Reader::join(path, "id"), "expected a string");
    }
  }
  auto width = rd.field(j, "width_m", path, std::nullopt);
  RoadType road = RoadType::Rural;
  if (auto it = j.find("road_type"); it != j.end()) {
    auto r = it->is_string() ? parse_road_type(it->get_ref<const std::string&>()) : std::nullopt;
    if (r) {
      road = *r;
    } else {
      rd.error(Reader::join(path, "road_type"), "expected one of urban, rural, motorway");
    }
  }
  auto left = read_gt_polyline(rd, j, "left_boundary", path);
  auto right = read_gt_polyline(rd, j, "right_boundary", path);
  std::optional<AdjacentLaneInfo> left_adj = AdjacentLaneInfo{};
  std::optional<AdjacentLaneInfo> right_adj = AdjacentLaneInfo{};
  if (auto it = j.find("left_adjacent"); it != j.end()) left_adj = read_adjacent(rd, *it, Reader::join(path, "left_adjacent"));
  if (auto it = j.find("right_adjacent"); it != j.end()) right_adj = read_adjacent(rd, *it, Reader::join(path, "right_adjacent"));
  if (!width || !left || !right || !left_adj || !right_adj) return std::nullopt;
  if (!(*width > 0.0)) {
    rd.error(Reader::join(path, "width_m"), "lane width must be > 0");
    return std::nullopt;
  }
  return Lane{id, std::move(*left), std::move(*right), LaneContext{*width, *left_adj, *right_adj, road}};
}

/// Geometric sanity of the ground-truth lane: boundaries must not touch or
/// cross, and the stated width must agree with the measured separation.
inline bool check_sample_budget(Reader& rd, const Lane& lane, double spacing, const std::string& path) {
  if (std::max(lane.left_boundary.length(), lane.right_boundary.length()) / spacing <= kMaxSamplesPerBoundary) {
    return true;
  }
  rd.error(path, "boundary too long for the sample spacing (over " +
                     std::to_string(static_cast<long long>(kMaxSamplesPerBoundary)) + " samples)");
  return false;
}

inline void validate_lane(Reader& rd, const Lane& lane, double spacing, const std::string& path) {
  if (!check_sample_budget(rd, lane, spacing, path)) return;
  const Polyline3& l = lane.left_boundary;
  const Polyline3& r = lane.right_boundary;
  const double shorter = std::min(l.length(), r.length());
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(shorter / spacing)) + 1);
  double separation = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n - 1);
    const Point3 a = l.point_at(f * l.length());
    const Point3 b = r.point_at(f * r.length());
    const Point3 mid = midpoint(a, b);
    if (closest_point(l, mid).distance <= 1e-6 || closest_point(r, mid).distance <= 1e-6) {
      rd.error(path, "lane boundaries touch or cross near sample " + std::to_string(i));
      return;
    }
    separation += distance(a, b);
  }
  separation /= static_cast<double>(n);
  const double rel = std::abs(lane.width() - separation) / separation;
  const std::string wpath = Reader::join(path, "width_m");
  char buf[160];
  std::snprintf(buf, sizeof buf, "stated width %.3f m vs measured mean boundary separation %.3f m",
                lane.width(), separation);
  if (rel > 0.5) {
    rd.error(wpath, buf);
  } else if (rel > 0.2) {
    rd.warn(wpath, buf);
  }

  const double movement = lane.width() - kMaxVehicleWidth;
  const double table = lookup_movement_tolerance(lane.context.road_type);
  if (std::abs(movement - table) > 0.05) {
    std::snprintf(buf, sizeof buf,
                  "movement range %.2f m at %.2f m vehicle width differs from the %s road tolerance %.2f m",
                  movement, kMaxVehicleWidth, std::string(to_string(lane.context.road_type)).c_str(), table);
    rd.warn(Reader::join(path, "road_type"), buf);
  }
}

inline std::optional<EgoState> read_ego(Reader& rd, const Json& j, const std::string& path, double lane_width) {
  if (!rd.expect_object(j, path)) return std::nullopt;
  rd.check_keys(j, path, {"speed_mps", "speed_kmh", "vehicle_width_m"});
  auto v0 = rd.speed(j, "speed", path, std::nullopt);
  auto w = rd.field(j, "vehicle_width_m", path, std::nullopt);
  if (!v0 || !w) return std::nullopt;
  if (!(*w > 0.0)) {
    rd.error(Reader::join(path, "vehicle_width_m"), "vehicle width must be > 0");
    return std::nullopt;
  }
  if (!(*w < lane_width)) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "vehicle wider than lane: vehicle width %.3f m must be smaller than lane width %.3f m "
                  "(tolerable lateral deviation (w_l - w_v) / 2 would not be positive)",
                  *w, lane_width);
    rd.error(Reader::join(path, "vehicle_width_m"), buf);
    return std::nullopt;
  }
  return EgoState{*v0, *w};
}

inline std::optional<EvalConfig> read_eval_config(Reader& rd, const Json* j, const std::string& path) {
  EvalConfig cfg;
  if (j == nullptr) return cfg;
  if (!rd.expect_object(*j, path)) return std::nullopt;
  rd.check_keys(*j, path,
                {"t_delay_s", "braking_decel_mps2", "x_lat_m", "safety_margin_long", "lat_usable_fraction",
                 "tp_threshold_m", "sample_spacing_m"});
  auto t = rd.field(*j, "t_delay_s", path, cfg.t_delay);
  auto a = rd.field(*j, "braking_decel_mps2", path, cfg.braking_decel);
  auto x = rd.field(*j, "x_lat_m", path, cfg.x_lat);
  auto m = rd.field(*j, "safety_margin_long", path, cfg.safety_margin_long);
  auto f = rd.field(*j, "lat_usable_fraction", path, cfg.lat_usable_fraction);
  auto tp = rd.field(*j, "tp_threshold_m", path, cfg.tp_threshold);
  auto sp = rd.field(*j, "sample_spacing_m", path, cfg.sample_spacing);
  if (!t || !a || !x || !m || !f || !tp || !sp) return std::nullopt;
  cfg = EvalConfig{*t, *a, *x, *m, *f, *tp, *sp};
  try {
    cfg.validate();
  } catch (const InputError& e) {
    rd.error(path, e.what());
    return std::nullopt;
  }
  return cfg;
}

inline std::optional<std::optional<Polyline3>> read_detection(Reader& rd, const Json& frame, std::string_view key,
                                                              const std::string& path,
                                                              std::optional<std::string>& geometry_error) {
  auto it = frame.find(key);
  if (it == frame.end() || it->is_null()) return std::optional<Polyline3>{};
  const std::string p = Reader::join(path, key);
  auto pts = rd.points(*it, p);
  if (!pts) return std::nullopt;
  try {
    return std::optional<Polyline3>(Polyline3(std::move(*pts)));
  } catch (const GeometryError& e) {
    rd.warn(p, std::string("unusable detection, frame scored as no detection: ") + e.what());
    geometry_error = std::string(key) + " boundary: " + e.what();
    return std::optional<Polyline3>{};
  }
}

inline std::optional<std::vector<DetectionFrame>> read_frames(Reader& rd, const Json& j, const std::string& path,
                                                              double lane_width) {
  if (!j.is_array()) {
    rd.error(path, "expected an array of frames");
    return std::nullopt;
  }
  std::vector<DetectionFrame> frames;
  bool ok = true;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = Reader::index(path, i);
    const Json& fj = j[i];
    if (!rd.expect_object(fj, p)) {
      ok = false;
      continue;
    }
    rd.check_keys(fj, p, {"frame_index", "timestamp_s", "ego", "ego_origin", "left", "right", "geometry_error"});
    DetectionFrame f;
    auto idx = fj.find("frame_index");
    if (idx == fj.end() || !idx->is_number_unsigned()) {
      rd.error(Reader::join(p, "frame_index"), "expected a non-negative integer");
      ok = false;
    } else {
      f.frame_index = idx->get<std::size_t>();
    }
    auto ts = rd.field(fj, "timestamp_s", p, std::nullopt);
    std::optional<EgoState> ego;
    if (auto e = fj.find("ego"); e != fj.end()) {
      ego = read_ego(rd, *e, Reader::join(p, "ego"), lane_width);
    } else {
      rd.error(Reader::join(p, "ego"), "missing required field");
    }
    std::optional<Point3> origin;
    if (auto o = fj.find("ego_origin"); o != fj.end()) {
      origin = rd.point(*o, Reader::join(p, "ego_origin"));
    } else {
      rd.error(Reader::join(p, "ego_origin"), "missing required field");
    }
    if (auto g = fj.find("geometry_error"); g != fj.end() && g->is_string()) f.geometry_error = g->get<std::string>();
    auto left = read_detection(rd, fj, "left", p, f.geometry_error);
    auto right = read_detection(rd, fj, "right", p, f.geometry_error);
    if (!ts || !ego || !origin || !left || !right) {
      ok = false;
      continue;
    }
    f.timestamp = *ts;
    f.ego = *ego;
    f.ego_origin = *origin;
    f.left = std::move(*left);
    f.right = std::move(*right);
    if (!frames.empty()) {
      if (f.frame_index <= frames.back().frame_index) {
        rd.error(Reader::join(p, "frame_index"), "frame indices must be unique and increasing");
        ok = false;
      }
      if (f.timestamp < frames.back().timestamp) {
        rd.error(Reader::join(p, "timestamp_s"), "timestamps must be non-decreasing");
        ok = false;
      }
    }
    frames.push_back(std::move(f));
  }
  if (!ok) return std::nullopt;
  return frames;
}

inline std::optional<std::vector<TrajectoryPoint>> read_trajectory(Reader& rd, const Json& j,
                                                                   const std::string& path, double lane_width) {
  if (!j.is_array() || j.empty()) {
    rd.error(path, "expected a non-empty array of trajectory points");
    return std::nullopt;
  }
  std::vector<TrajectoryPoint> out;
  bool ok = true;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = Reader::index(path, i);
    if (!rd.expect_object(j[i], p)) {
      ok = false;
      continue;
    }
    rd.check_keys(j[i], p, {"timestamp_s", "ego", "ego_origin"});
    auto ts = rd.field(j[i], "timestamp_s", p, std::nullopt);
    std::optional<EgoState> ego;
    std::optional<Point3> origin;
    if (auto e = j[i].find("ego"); e != j[i].end()) {
      ego = read_ego(rd, *e, Reader::join(p, "ego"), lane_width);
    } else {
      rd.error(Reader::join(p, "ego"), "missing required field");
    }
    if (auto o = j[i].find("ego_origin"); o != j[i].end()) {
      origin = rd.point(*o, Reader::join(p, "ego_origin"));
    } else {
      rd.error(Reader::join(p, "ego_origin"), "missing required field");
    }
    if (!ts || !ego || !origin) {
      ok = false;
      continue;
    }
    if (!out.empty() && *ts < out.back().timestamp) {
      rd.error(Reader::join(p, "timestamp_s"), "timestamps must be non-decreasing");
      ok = false;
    }
    out.push_back({*ts, *origin, *ego});
  }
  if (!ok) return std::nullopt;
  return out;
}

inline std::optional<OffsetSchedule> read_offset(Reader& rd, const Json& obj, std::string_view key,
                                                 const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return OffsetSchedule{};
  const std::string p = Reader::join(path, key);
  if (!it->is_object()) {
    auto v = rd.number(*it, p);
    if (!v) return std::nullopt;
    return OffsetSchedule{*v, {}};
  }
  rd.check_keys(*it, p, {"base_m", "intervals"});
  auto base = rd.field(*it, "base_m", p, 0.0);
  if (!base) return std::nullopt;
  OffsetSchedule sch{*base, {}};
  if (auto iv = it->find("intervals"); iv != it->end()) {
    const std::string ip = Reader::join(p, "intervals");
    if (!iv->is_array()) {
      rd.error(ip, "expected an array");
      return std::nullopt;
    }
    for (std::size_t i = 0; i < iv->size(); ++i) {
      const std::string q = Reader::index(ip, i);
      const Json& e = (*iv)[i];
      if (!rd.expect_object(e, q)) return std::nullopt;
      rd.check_keys(e, q, {"from_s", "to_s", "offset_m"});
      auto from = rd.field(e, "from_s", q, std::nullopt);
      auto to = rd.field(e, "to_s", q, std::nullopt);
      auto off = rd.field(e, "offset_m", q, std::nullopt);
      if (!from || !to || !off) return std::nullopt;
      if (!(*to > *from)) {
        rd.error(q, "to_s must be greater than from_s");
        return std::nullopt;
      }
      sch.intervals.push_back({*from, *to, *off});
    }
  }
  return sch;
}

inline std::optional<SensorModel> read_sensor(Reader& rd, const Json& j, const std::string& path) {
  if (!rd.expect_object(j, path)) return std::nullopt;
  rd.check_keys(j, path,
                {"rng", "seed", "range_left_m", "range_right_m", "lateral_noise_sigma_m", "offset_left_m",
                 "offset_right_m", "dropout_frame_prob", "dropout_boundary_prob", "sample_spacing_m"});
  SensorModel m;
  bool ok = true;
  if (auto it = j.find("rng"); it != j.end()) {
    if (!it->is_string() || it->get_ref<const std::string&>() != CounterRng::kAlgorithm) {
      rd.error(Reader::join(path, "rng"), "unsupported generator; expected \"" +
                                              std::string(CounterRng::kAlgorithm) + "\"");
      ok = false;
    }
  }
  if (auto it = j.find("seed"); it != j.end()) {
    if (it->is_number_unsigned()) {
      m.seed = it->get<std::uint64_t>();
    } else {
      rd.error(Reader::join(path, "seed"), "expected a non-negative integer");
      ok = false;
    }
  }
  auto range = [&](std::string_view key) -> std::optional<double> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return SensorModel::kUnlimited;
    auto v = rd.number(*it, Reader::join(path, key));
    if (v && !(*v > 0.0)) {
      rd.error(Reader::join(path, key), "range must be > 0 (null for unlimited)");
      return std::nullopt;
    }
    return v;
  };
  auto rl = range("range_left_m");
  auto rr = range("range_right_m");
  auto sigma = rd.field(j, "lateral_noise_sigma_m", path, 0.0);
  auto ol = read_offset(rd, j, "offset_left_m", path);
  auto orr = read_offset(rd, j, "offset_right_m", path);
  auto pf = rd.field(j, "dropout_frame_prob", path, 0.0);
  auto pb = rd.field(j, "dropout_boundary_prob", path, 0.0);
  auto sp = rd.field(j, "sample_spacing_m", path, 0.1);
  if (!ok || !rl || !rr || !sigma || !ol || !orr || !pf || !pb || !sp) return std::nullopt;
  m.range_left = *rl;
  m.range_right = *rr;
  m.lateral_noise_sigma = *sigma;
  m.offset_left = std::move(*ol);
  m.offset_right = std::move(*orr);
  m.dropout_frame_prob = *pf;
  m.dropout_boundary_prob = *pb;
  m.sample_spacing = *sp;
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    rd.error(path, e.what());
    return std::nullopt;
  }
  return m;
}

inline std::optional<ScenarioFile> read_scenario(Reader& rd, const Json& root) {
  if (!rd.expect_object(root, "")) return std::nullopt;
  rd.check_keys(root, "", {"schema_version", "name", "eval_config", "gt_lane", "frames", "trajectory", "sensor"});

  auto ver = root.find("schema_version");
  if (ver == root.end() || !ver->is_number_integer()) {
    rd.error("schema_version", "missing or not an integer");
    return std::nullopt;
  }
  if (ver->get<std::int64_t>() != kSchemaVersion) {
    rd.error("schema_version", "unsupported schema version " + std::to_string(ver->get<std::int64_t>()) +
                                   " (expected " + std::to_string(kSchemaVersion) + ")");
    return std::nullopt;
  }

  std::string name;
  if (auto it = root.find("name"); it != root.end()) {
    if (it->is_string()) {
      name = it->get<std::string>();
    } else {
      rd.error("name", "expected a string");
    }
  }
  auto cfg_it = root.find("eval_config");
  auto cfg = read_eval_config(rd, cfg_it == root.end() ? nullptr : &*cfg_it, "eval_config");

  auto lane_it = root.find("gt_lane");
  if (lane_it == root.end()) {
    rd.error("gt_lane", "missing required field");
    return std::nullopt;
  }
  auto lane = read_lane(rd, *lane_it, "gt_lane");
  if (!lane || !cfg) return std::nullopt;
  validate_lane(rd, *lane, cfg->sample_spacing, "gt_lane");

  const bool has_frames = root.contains("frames");
  const bool has_traj = root.contains("trajectory");
  const bool has_sensor = root.contains("sensor");
  if (has_frames == (has_traj || has_sensor)) {
    rd.error("", "exactly one of 'frames' or 'trajectory' + 'sensor' must be present");
    return std::nullopt;
  }
  std::variant<std::vector<DetectionFrame>, SyntheticSource> source;
  if (has_frames) {
    auto frames = read_frames(rd, root.at("frames"), "frames", lane->width());
    if (!frames) return std::nullopt;
    source = std::move(*frames);
  } else {
    if (!has_traj || !has_sensor) {
      rd.error(has_traj ? "sensor" : "trajectory", "synthetic scenarios need both 'trajectory' and 'sensor'");
      return std::nullopt;
    }
    auto traj = read_trajectory(rd, root.at("trajectory"), "trajectory", lane->width());
    auto sensor = read_sensor(rd, root.at("sensor"), "sensor");
    if (!traj || !sensor) return std::nullopt;
    if (!check_sample_budget(rd, *lane, sensor->sample_spacing, "sensor.sample_spacing_m")) return std::nullopt;
    source = SyntheticSource{std::move(*traj), std::move(*sensor)};
  }
  ScenarioFile sf{kSchemaVersion, std::move(name), std::move(*lane), *cfg, std::move(source)};
  std::vector<double> widths;
  if (sf.has_frames()) {
    for (const auto& f : sf.frames()) widths.push_back(f.ego.vehicle_width);
  } else {
    for (const auto& t : sf.synthetic().trajectory) widths.push_back(t.ego.vehicle_width);
  }
  for (double w : widths) {
    try {
      (void)lateral_threshold(sf.gt_lane.width(), w, sf.eval_config.x_lat);
    } catch (const InputError& e) {
      rd.error("eval_config.x_lat_m", e.what());
      return std::nullopt;
    }
  }
  return sf;
}

}  // namespace detail

/// Parses and validates a scenario. Never throws; all problems are returned
/// as located diagnostics.
inline ParseResult parse_scenario(std::string_view bytes, ParseOptions opt = {}) {
  ParseResult out;
  detail::Reader rd(opt);
  try {
    const auto root = detail::Json::parse(detail::quote_non_finite_tokens(bytes));
    auto sf = detail::read_scenario(rd, root);
    if (sf && rd.errors.empty()) out.scenario = std::move(sf);
  } catch (const detail::Json::exception& e) {
    rd.error("", std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    rd.error("", std::string("unexpected input: ") + e.what());
  }
  out.errors = std::move(rd.errors);
  out.warnings = std::move(rd.warnings);
  return out;
}

namespace detail {

inline OrderedJson point_json(const Point3& p) { return OrderedJson::array({p.x, p.y, p.z}); }

inline OrderedJson polyline_json(const Polyline3& pl) {
  OrderedJson a = OrderedJson::array();
  for (const auto& p : pl.points()) a.push_back(point_json(p));
  return a;
}

inline OrderedJson adjacent_json(const AdjacentLaneInfo& adj) {
  return {{"kind", to_string(adj.kind)}, {"speed_limit_mps", adj.speed_limit}, {"angle_deg", adj.angle_deg}};
}

inline OrderedJson ego_json(const EgoState& e) { return {{"speed_mps", e.v0}, {"vehicle_width_m", e.vehicle_width}}; }

inline OrderedJson offset_json(const OffsetSchedule& s) {
  if (s.intervals.empty()) return s.base;
  OrderedJson iv = OrderedJson::array();
  for (const auto& i : s.intervals) iv.push_back({{"from_s", i.from_s}, {"to_s", i.to_s}, {"offset_m", i.offset}});
  return {{"base_m", s.base}, {"intervals", iv}};
}

inline OrderedJson range_json(double r) { return std::isfinite(r) ? OrderedJson(r) : OrderedJson(nullptr); }

}  // namespace detail

/// Serializes a scenario; indent < 0 writes compact JSON. Output is
/// byte-stable for equal inputs.
inline std::string write_scenario(const ScenarioFile& sf, int indent = 2) {
  using detail::OrderedJson;
  const EvalConfig& c = sf.eval_config;
  const Lane& lane = sf.gt_lane;
  OrderedJson root;
  root["schema_version"] = sf.schema_version;
  root["name"] = sf.name;
  root["eval_config"] = {{"t_delay_s", c.t_delay},
                         {"braking_decel_mps2", c.braking_decel},
                         {"x_lat_m", c.x_lat},
                         {"safety_margin_long", c.safety_margin_long},
                         {"lat_usable_fraction", c.lat_usable_fraction},
                         {"tp_threshold_m", c.tp_threshold},
                         {"sample_spacing_m", c.sample_spacing}};
  root["gt_lane"] = {{"id", lane.id},
                     {"width_m", lane.width()},
                     {"road_type", to_string(lane.context.road_type)},
                     {"left_boundary", detail::polyline_json(lane.left_boundary)},
                     {"right_boundary", detail::polyline_json(lane.right_boundary)},
                     {"left_adjacent", detail::adjacent_json(lane.context.left_adjacent)},
                     {"right_adjacent", detail::adjacent_json(lane.context.right_adjacent)}};
  if (sf.has_frames()) {
    OrderedJson frames = OrderedJson::array();
    for (const auto& f : sf.frames()) {
      OrderedJson fj{{"frame_index", f.frame_index},
                     {"timestamp_s", f.timestamp},
                     {"ego", detail::ego_json(f.ego)},
                     {"ego_origin", detail::point_json(f.ego_origin)},
                     {"left", f.left ? detail::polyline_json(*f.left) : OrderedJson(nullptr)},
                     {"right", f.right ? detail::polyline_json(*f.right) : OrderedJson(nullptr)}};
      if (f.geometry_error) fj["geometry_error"] = *f.geometry_error;
      frames.push_back(std::move(fj));
    }
    root["frames"] = std::move(frames);
  } else {
    const auto& syn = sf.synthetic();
    OrderedJson traj = OrderedJson::array();
    for (const auto& t : syn.trajectory) {
      traj.push_back({{"timestamp_s", t.timestamp},
                      {"ego", detail::ego_json(t.ego)},
                      {"ego_origin", detail::point_json(t.ego_origin)}});
    }
    const SensorModel& m = syn.sensor;
    root["trajectory"] = std::move(traj);
    root["sensor"] = {{"rng", CounterRng::kAlgorithm},
                      {"seed", m.seed},
                      {"range_left_m", detail::range_json(m.range_left)},
                      {"range_right_m", detail::range_json(m.range_right)},
                      {"lateral_noise_sigma_m", m.lateral_noise_sigma},
                      {"offset_left_m", detail::offset_json(m.offset_left)},
                      {"offset_right_m", detail::offset_json(m.offset_right)},
                      {"dropout_frame_prob", m.dropout_frame_prob},
                      {"dropout_boundary_prob", m.dropout_boundary_prob},
                      {"sample_spacing_m", m.sample_spacing}};
  }
  return root.dump(indent) + "\n";
}

// ---------------------------------------------------------------------------
// Results

/// One row of a results file: the per-frame safety and performance numbers.
struct ResultRow {
  std::size_t frame_index = 0;
  double d_long = 0.0;
  double d_det = 0.0;
  double v_r = 0.0;
  double s_long = 0.0;
  double s_lat = 0.0;
  std::optional<double> s_scen;
  double S = 0.0;
  Classification classification = Classification::Insufficient;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<std::string> error;

  bool operator==(const ResultRow&) const = default;
};

struct FrameResult {
  std::size_t frame_index = 0;
  SafetyResult safety;
  PerfResult perf;

  ResultRow row() const {
    return {frame_index, safety.d_long, safety.d_det, safety.v_r, safety.s_long, safety.s_lat, safety.s_scen,
            safety.S, safety.classification, perf.tp, perf.fp, perf.fn, perf.precision, perf.recall, perf.f1,
            safety.error};
  }
};

enum class ResultFormat { CSV, JSON };

inline constexpr std::string_view kResultColumns =
    "frame_index,d_long,d_det,v_r,s_long,s_lat,s_scen,S,classification,tp,fp,fn,precision,recall,f1";

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string write_results(std::span<const ResultRow> rows, ResultFormat format) {
  if (format == ResultFormat::CSV) {
    std::string out(kResultColumns);
    out += '\n';
    char buf[64];
    auto num = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.4f", v);
      out += buf;
    };
    for (const auto& r : rows) {
      out += std::to_string(r.frame_index);
      for (double v : {r.d_long, r.d_det, r.v_r, r.s_long, r.s_lat}) {
        out += ',';
        num(v);
      }
      out += ',';
      if (r.s_scen) num(*r.s_scen);
      out += ',';
      num(r.S);
      out += ',';
      out += to_string(r.classification);
      for (std::uint64_t v : {r.tp, r.fp, r.fn}) {
        out += ',';
        out += std::to_string(v);
      }
      for (double v : {r.precision, r.recall, r.f1}) {
        out += ',';
        num(v);
      }
      out += '\n';
    }
    return out;
  }
  using detail::OrderedJson;
  OrderedJson arr = OrderedJson::array();
  for (const auto& r : rows) {
    OrderedJson j{{"frame_index", r.frame_index},
                  {"d_long", r.d_long},
                  {"d_det", r.d_det},
                  {"v_r", r.v_r},
                  {"s_long", r.s_long},
                  {"s_lat", r.s_lat},
                  {"s_scen", r.s_scen ? OrderedJson(*r.s_scen) : OrderedJson(nullptr)},
                  {"S", r.S},
                  {"classification", to_string(r.classification)},
                  {"tp", r.tp},
                  {"fp", r.fp},
                  {"fn", r.fn},
                  {"precision", r.precision},
                  {"recall", r.recall},
                  {"f1", r.f1}};
    if (r.error) j["error"] = *r.error;
    arr.push_back(std::move(j));
  }
  OrderedJson root{{"schema_version", kSchemaVersion}, {"results", std::move(arr)}};
  return root.dump(2) + "\n";
}

inline std::vector<ResultRow> parse_results_json(std::string_view bytes) {
  try {
    const auto root = detail::Json::parse(bytes);
    if (root.value("schema_version", 0) != kSchemaVersion) throw FormatError("unsupported results schema version");
    std::vector<ResultRow> rows;
    for (const auto& j : root.at("results")) {
      ResultRow r;
      r.frame_index = j.at("frame_index").get<std::size_t>();
      r.d_long = j.at("d_long").get<double>();
      r.d_det = j.at("d_det").get<double>();
      r.v_r = j.at("v_r").get<double>();
      r.s_long = j.at("s_long").get<double>();
      r.s_lat = j.at("s_lat").get<double>();
      if (!j.at("s_scen").is_null()) r.s_scen = j.at("s_scen").get<double>();
      r.S = j.at("S").get<double>();
      auto c = parse_classification(j.at("classification").get<std::string>());
      if (!c) throw FormatError("unknown classification");
      r.classification = *c;
      r.tp = j.at("tp").get<std::uint64_t>();
      r.fp = j.at("fp").get<std::uint64_t>();
      r.fn = j.at("fn").get<std::uint64_t>();
      r.precision = j.at("precision").get<double>();
      r.recall = j.at("recall").get<double>();
      r.f1 = j.at("f1").get<double>();
      if (j.contains("error")) r.error = j.at("error").get<std::string>();
      rows.push_back(std::move(r));
    }
    return rows;
  } catch (const detail::Json::exception& e) {
    throw FormatError(std::string("malformed results file: ") + e.what());
  }
}

}  // namespace lsm
