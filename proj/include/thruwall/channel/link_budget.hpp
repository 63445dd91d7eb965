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

#include <vector>

namespace thruwall::channel {

inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m

/// Homogeneous wall slab.
struct WallModel {
  double rel_permittivity_real = 5.5;  // real part of the relative permittivity
  double conductivity = 0.11;          // S/m
  double thickness = 0.2;              // m

  void validate() const;
};

/// Narrowband link budget. All gains/losses in dB, powers in dBm.
struct LinkBudget {
  double tx_power = 17.0;
  double tx_gain = 15.8;
  double rx_gain = 15.8;
  double amp_gain = 14.0;
  double carrier_freq = 5.8e9;     // Hz
  double distance = 3.8;           // m
  double cable_length = 13.0;      // m
  double cable_loss_rate = 1.27;   // dB/m
  double path_loss_exponent = 2.0;
  double reference_distance = 1.0;  // m
  std::vector<double> obstruction_losses;  // dB each

  void validate() const;
};

/// Material attenuation in dB/m: 1636 * sigma / sqrt(eps_r').
double wall_attenuation_rate(const WallModel& wall);

/// Total slab loss in dB (rate times thickness).
double wall_loss_db(const WallModel& wall);

/// 20 log10(lambda / (4 pi d)) with lambda = c / f.
double free_space_term(double carrier_freq, double distance);

/// PL(d0) + 10 n log10(d / d0).
double log_distance_path_loss(const LinkBudget& budget, double pl_at_ref);

/// P_T + G_T + G_R + amp + free-space term - cable loss - sum of obstructions.
double received_power(const LinkBudget& budget);

/// Wall thickness for which the budget (with the wall as its only
/// obstruction) closes at `target_dbm`.
double calibrate_wall_thickness(const LinkBudget& budget_without_wall, const WallModel& wall,
                                double target_dbm);

}  // namespace thruwall::channel
