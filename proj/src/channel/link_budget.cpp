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

#include "thruwall/channel/link_budget.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "thruwall/common/error.hpp"

namespace thruwall::channel {

void WallModel::validate() const {
  require(rel_permittivity_real >= 1.0, ErrorKind::invalid_material,
          "relative permittivity must be >= 1");
  require(conductivity >= 0.0, ErrorKind::invalid_material, "conductivity must be >= 0");
  require(thickness >= 0.0, ErrorKind::invalid_material, "wall thickness must be >= 0");
}

void LinkBudget::validate() const {
  require(carrier_freq > 0.0, ErrorKind::domain, "carrier frequency must be > 0");
  require(distance > 0.0, ErrorKind::domain, "distance must be > 0");
  require(reference_distance > 0.0, ErrorKind::domain, "reference distance must be > 0");
  require(cable_loss_rate >= 0.0, ErrorKind::domain, "cable loss rate must be >= 0");
}

double wall_attenuation_rate(const WallModel& wall) {
  wall.validate();
  const double rate = 1636.0 * wall.conductivity / std::sqrt(wall.rel_permittivity_real);
  require(std::isfinite(rate), ErrorKind::invalid_material, "attenuation rate is not finite");
  return rate;
}

double wall_loss_db(const WallModel& wall) { return wall_attenuation_rate(wall) * wall.thickness; }

double free_space_term(double carrier_freq, double distance) {
  require(carrier_freq > 0.0 && distance > 0.0, ErrorKind::domain,
          "free-space term needs positive frequency and distance");
  const double lambda = kSpeedOfLight / carrier_freq;
  return 20.0 * std::log10(lambda / (4.0 * std::numbers::pi * distance));
}

double log_distance_path_loss(const LinkBudget& budget, double pl_at_ref) {
  require(budget.reference_distance > 0.0, ErrorKind::domain, "reference distance must be > 0");
  require(budget.distance >= budget.reference_distance, ErrorKind::domain,
          "distance is below the reference distance");
  return pl_at_ref +
         10.0 * budget.path_loss_exponent * std::log10(budget.distance / budget.reference_distance);
}

double received_power(const LinkBudget& budget) {
  budget.validate();
  const double obstructions =
      std::accumulate(budget.obstruction_losses.begin(), budget.obstruction_losses.end(), 0.0);
  return budget.tx_power + budget.tx_gain + budget.rx_gain + budget.amp_gain +
         free_space_term(budget.carrier_freq, budget.distance) -
         budget.cable_length * budget.cable_loss_rate - obstructions;
}

double calibrate_wall_thickness(const LinkBudget& budget_without_wall, const WallModel& wall,
                                double target_dbm) {
  const double open = received_power(budget_without_wall);
  const double needed = open - target_dbm;
  require(needed > 0.0, ErrorKind::domain, "target power is above the wall-free budget");
  return needed / wall_attenuation_rate(wall);
}

}  // namespace thruwall::channel
