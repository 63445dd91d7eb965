/*
 * Copyright 2026 The thruwall Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "thruwall/ris/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "thruwall/common/error.hpp"

namespace thruwall::ris {

double to_dbm(double linear_mw) { return 10.0 * std::log10(std::max(linear_mw, kPowerFloor)); }

namespace {

const char* kind_name(FlipKind k) {
  switch (k) {
    case FlipKind::none: return "none";
    case FlipKind::row: return "row";
    case FlipKind::col: return "col";
  }
  return "none";
}

}  // namespace

std::string trace_to_csv(const PowerTrace& trace) {
  std::string out = "step,flip_kind,flip_index,measured_power_dbm,accepted_power_dbm,accepted\n";
  char line[160];
  for (std::size_t i = 0; i < trace.trials.size(); ++i) {
    const auto& t = trace.trials[i];
    const long index = t.kind == FlipKind::none ? -1L : static_cast<long>(t.index);
    std::snprintf(line, sizeof line, "%zu,%s,%ld,%.9f,%.9f,%d\n", i, kind_name(t.kind), index,
                  to_dbm(t.measured), to_dbm(trace.values[i]), t.accepted ? 1 : 0);
    out += line;
  }
  return out;
}

nlohmann::json config_to_json(const PhaseMatrix& config) {
  nlohmann::json rows = nlohmann::json::array();
  const auto mult = config.multipliers();
  for (std::size_t r = 0; r < config.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < config.cols(); ++c) row.push_back(mult[r * config.cols() + c]);
    rows.push_back(std::move(row));
  }
  return {{"rows", config.rows()}, {"cols", config.cols()}, {"half_pi_multipliers", rows}};
}

PhaseMatrix config_from_json(const nlohmann::json& j) {
  try {
    const GridShape shape{j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>()};
    const auto& rows = j.at("half_pi_multipliers");
    require(rows.size() == shape.rows, ErrorKind::dimension, "row count mismatch in phase config");
    std::vector<int> flat;
    for (const auto& row : rows) {
      require(row.size() == shape.cols, ErrorKind::dimension, "column count mismatch in phase config");
      for (const auto& v : row) flat.push_back(v.get<int>());
    }
    return PhaseMatrix::from_multipliers(shape, flat);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed phase config: ") + e.what());
  }
}

nlohmann::json gain_report_to_json(const GainReport& report) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : report.trials) {
    trials.push_back({{"initial_power", t.initial_power},
                      {"final_power", t.final_power},
                      {"gain_db", t.gain_db},
                      {"floored", t.floored}});
  }
  return {{"trials", report.trials.size()},
          {"mean_db", report.mean_db},
          {"stddev_db", report.stddev_db},
          {"min_db", report.min_db},
          {"max_db", report.max_db},
          {"p05_db", report.p05_db},
          {"p50_db", report.p50_db},
          {"p95_db", report.p95_db},
          {"floored_trials", report.floored_trials},
          {"per_trial", trials}};
}

}  // namespace thruwall::ris
