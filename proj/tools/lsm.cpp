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

// lsm: evaluate lane detections with the Lane Safety Metric.
//
//   lsm evaluate <file> [-o out] [--format csv|json] [--strict]
//   lsm simulate <file> [-o out] [--strict]
//   lsm test-cases [--export dir]
//
// Exit status: 0 success, 1 validation error, 2 I/O error.
// LSM_LOG=trace|debug|info|warn|error|off sets diagnostic verbosity.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "lsm/fixtures.hpp"
#include "lsm/lsm.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kIo = 2 };

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("lsm");
  logger->set_pattern("%v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("LSM_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

bool write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  out.close();
  return static_cast<bool>(out);
}

void report(const std::string& file, const lsm::ParseResult& r) {
  for (const auto& w : r.warnings) {
    spdlog::warn("{}: warning: {}{}{}", file, w.path, w.path.empty() ? "" : ": ", w.message);
  }
  for (const auto& e : r.errors) {
    spdlog::error("{}: error: {}{}{}", file, e.path, e.path.empty() ? "" : ": ", e.message);
  }
}

// Loads and validates; returns the exit code on failure.
std::variant<lsm::ScenarioFile, int> load(const std::string& file, bool strict) {
  auto bytes = read_file(file);
  if (!bytes) {
    spdlog::error("{}: error: cannot read file", file);
    return kIo;
  }
  auto parsed = lsm::parse_scenario(*bytes, {strict});
  report(file, parsed);
  if (!parsed.ok()) return kValidation;
  spdlog::info("{}: loaded scenario '{}'", file, parsed.scenario->name);
  return std::move(*parsed.scenario);
}

std::string default_name(const lsm::ScenarioFile& sf, const std::string& file) {
  if (!sf.name.empty()) return sf.name;
  return std::filesystem::path(file).filename().string();
}

int cmd_evaluate(const std::string& file, const std::string& out_path, const std::string& format, bool strict) {
  auto loaded = load(file, strict);
  if (auto* code = std::get_if<int>(&loaded)) return *code;
  const auto& sf = std::get<lsm::ScenarioFile>(loaded);

  std::vector<lsm::FrameResult> results;
  try {
    results = lsm::evaluate_scenario(sf);
  } catch (const std::exception& e) {
    spdlog::error("{}: error: {}", file, e.what());
    return kValidation;
  }
  if (results.empty()) {
    spdlog::error("{}: error: scenario has no frames", file);
    return kValidation;
  }
  for (const auto& r : results) {
    if (r.safety.error) spdlog::warn("{}: frame {}: {}", file, r.frame_index, *r.safety.error);
  }
  const auto rows = lsm::result_rows(results);
  const auto fmt = format == "json" ? lsm::ResultFormat::JSON : lsm::ResultFormat::CSV;
  const std::string data = lsm::write_results(rows, fmt);
  const std::string summary = lsm::format_summary(lsm::aggregate(results, default_name(sf, file)));

  if (out_path.empty()) {
    std::cout << data;
    std::cerr << summary;
  } else {
    if (!write_file(out_path, data)) {
      spdlog::error("{}: error: cannot write file", out_path);
      return kIo;
    }
    std::cout << summary;
  }
  return kOk;
}

int cmd_simulate(const std::string& file, const std::string& out_path, bool strict) {
  auto loaded = load(file, strict);
  if (auto* code = std::get_if<int>(&loaded)) return *code;
  auto sf = std::get<lsm::ScenarioFile>(std::move(loaded));
  if (sf.has_frames()) {
    spdlog::error("{}: error: simulate needs a scenario with 'trajectory' and 'sensor'", file);
    return kValidation;
  }
  sf.source = lsm::materialize_frames(sf);
  const std::string data = lsm::write_scenario(sf, -1);
  if (out_path.empty()) {
    std::cout << data;
  } else if (!write_file(out_path, data)) {
    spdlog::error("{}: error: cannot write file", out_path);
    return kIo;
  }
  return kOk;
}

double mean_of(const std::vector<lsm::FrameResult>& rs, double lsm::SafetyResult::*field) {
  double sum = 0.0;
  for (const auto& r : rs) sum += r.safety.*field;
  return sum / static_cast<double>(rs.size());
}

int cmd_test_cases(const std::string& export_dir) {
  const auto cases = lsm::fixtures::showcase_cases();
  if (!export_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(export_dir, ec);
    for (const auto& sf : lsm::fixtures::exported_scenarios()) {
      const auto path = (std::filesystem::path(export_dir) / (sf.name + ".scenario.json")).string();
      if (!write_file(path, lsm::write_scenario(sf))) {
        spdlog::error("{}: error: cannot write file", path);
        return kIo;
      }
    }
  }
  std::printf("%-5s %7s %7s %7s %7s  %-12s %7s %7s %7s\n", "case", "S", "s_long", "s_lat", "s_scen", "class",
              "P", "R", "F1");
  for (const auto& sf : cases) {
    const auto rs = lsm::evaluate_scenario(sf);
    const auto sum = lsm::aggregate(rs, sf.name);
    std::string scen = "-";
    double scen_sum = 0.0;
    std::size_t scen_n = 0;
    for (const auto& r : rs) {
      if (r.safety.s_scen) {
        scen_sum += *r.safety.s_scen;
        ++scen_n;
      }
    }
    if (scen_n > 0) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.4f", scen_sum / static_cast<double>(scen_n));
      scen = buf;
    }
    std::printf("%-5s %7.4f %7.4f %7.4f %7s  %-12s %7.4f %7.4f %7.4f\n", sf.name.c_str(), sum.safety_mean,
                mean_of(rs, &lsm::SafetyResult::s_long), mean_of(rs, &lsm::SafetyResult::s_lat), scen.c_str(),
                std::string(lsm::to_string(lsm::classify(sum.safety_mean))).c_str(), sum.precision, sum.recall,
                sum.f1);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Lane Safety Metric evaluation toolkit"};
  app.require_subcommand(1);

  std::string file, out, format = "csv", export_dir;
  bool strict = false;

  auto* eval = app.add_subcommand("evaluate", "score a scenario's frames; results to -o or stdout");
  eval->add_option("file", file, "scenario file (.scenario.json)")->required();
  eval->add_option("-o,--output", out, "results file");
  eval->add_option("--format", format, "results format")->check(CLI::IsMember({"csv", "json"}));
  eval->add_flag("--strict", strict, "treat warnings and unknown fields as errors");

  auto* sim = app.add_subcommand("simulate", "synthesize detection frames from trajectory + sensor");
  sim->add_option("file", file, "scenario file with trajectory and sensor")->required();
  sim->add_option("-o,--output", out, "output scenario file (default stdout)");
  sim->add_flag("--strict", strict, "treat warnings and unknown fields as errors");

  auto* cases = app.add_subcommand("test-cases", "run the bundled showcase scenarios");
  cases->add_option("--export", export_dir, "also write the fixtures as .scenario.json into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  if (*eval) return cmd_evaluate(file, out, format, strict);
  if (*sim) return cmd_simulate(file, out, strict);
  return cmd_test_cases(export_dir);
}
