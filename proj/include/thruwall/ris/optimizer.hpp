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

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "thruwall/common/matrix.hpp"
#include "thruwall/ris/phase_matrix.hpp"

namespace thruwall::ris {

/// Single-antenna link through the surface: y = h1^H diag(w) h2 x + n.
struct CascadeChannel {
  std::vector<Complex> h1;  // surface -> Rx
  std::vector<Complex> h2;  // Tx -> surface
  double tx_symbol_power = 1.0;
  double noise_variance = 0.0;
  std::size_t averaging_samples = 1;

  std::size_t elements() const noexcept { return h1.size(); }
  /// conj(h1_l) * h2_l, the per-element gain seen through the surface.
  std::vector<Complex> element_gains() const;
  void validate() const;

  /// Channel whose per-element gains equal `gains` (h1 = 1, h2 = gains).
  static CascadeChannel from_gains(const std::vector<Complex>& gains);
};

/// i.i.d. CN(0,1) entries for both h1 and h2.
CascadeChannel random_cascade(std::size_t elements, std::mt19937_64& rng);

/// Noiseless combined gain h1^H W h2.
Complex combined_gain(const PhaseMatrix& config, const CascadeChannel& chan);

/// Average received power over `averaging_samples` symbols. Noiseless
/// channels return |h1^H W h2|^2 E|x|^2 exactly; noisy ones are seeded.
double measure_power(const PhaseMatrix& config, const CascadeChannel& chan, std::uint64_t seed);

using PowerMeter = std::function<double(const PhaseMatrix&)>;

enum class FlipKind { none, row, col };

struct FlipTrial {
  FlipKind kind = FlipKind::none;
  std::size_t index = 0;
  double measured = 0.0;  // power of the candidate configuration
  bool accepted = false;
};

/// values[t] is the power of the accepted configuration after trial t
/// (values[0] is the initial measurement). trials[0] describes the
/// initial measurement with kind == none.
struct PowerTrace {
  std::vector<double> values;
  std::vector<FlipTrial> trials;

  std::vector<bool> accepted_flips() const;
};

struct GreedyResult {
  PhaseMatrix config;
  PowerTrace trace;
};

/// Row-then-column single-pass flip search starting from all -pi/2. A flip
/// is kept only if it strictly increases the measured power; ties revert.
/// After a revert the previous accepted power is carried forward.
GreedyResult greedy_optimize(GridShape grid, const PowerMeter& measure);
GreedyResult greedy_optimize(GridShape grid, const CascadeChannel& chan);

struct OracleResult {
  PhaseMatrix config;
  double power = 0.0;
};

/// Noiseless global optimum by enumeration of all 2^(M*N) states.
OracleResult exhaustive_oracle(GridShape grid, const CascadeChannel& chan,
                               std::size_t max_elements = 16);

enum class ChannelModelKind { iid_gaussian, aligned, fixed };

struct ChannelModelSpec {
  ChannelModelKind kind = ChannelModelKind::iid_gaussian;
  CascadeChannel fixed;  // used when kind == fixed
};

struct GainTrial {
  double initial_power = 0.0;
  double final_power = 0.0;
  double gain_db = 0.0;
  bool floored = false;  // initial power was zero; gain is relative to the floor
};

struct GainReport {
  std::vector<GainTrial> trials;
  double mean_db = 0.0;
  double stddev_db = 0.0;
  double min_db = 0.0;
  double max_db = 0.0;
  double p05_db = 0.0;
  double p50_db = 0.0;
  double p95_db = 0.0;
  std::size_t floored_trials = 0;
};

/// One cascade drawn from `model`, seeded.
CascadeChannel draw_channel(const ChannelModelSpec& model, std::size_t elements,
                            std::uint64_t seed);

inline constexpr double kPowerFloor = 1e-12;

GainReport array_gain_report(std::size_t trials, GridShape grid, const ChannelModelSpec& model,
                             std::uint64_t seed);

}  // namespace thruwall::ris
