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

#pragma once

#include <string>

#include <json.hpp>

#include "thruwall/ris/optimizer.hpp"

namespace thruwall::ris {

/// 10*log10 of a linear power in mW, floored at kPowerFloor.
double to_dbm(double linear_mw);

/// step,flip_kind,flip_index,measured_power_dbm,accepted_power_dbm,accepted
std::string trace_to_csv(const PowerTrace& trace);

/// {"rows", "cols", "half_pi_multipliers": [[-1|1, ...], ...]}
nlohmann::json config_to_json(const PhaseMatrix& config);
PhaseMatrix config_from_json(const nlohmann::json& j);

nlohmann::json gain_report_to_json(const GainReport& report);

}  // namespace thruwall::ris
