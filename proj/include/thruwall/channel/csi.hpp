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
#include <optional>
#include <vector>

#include "thruwall/channel/link_budget.hpp"
#include "thruwall/common/matrix.hpp"
#include "thruwall/ris/phase_matrix.hpp"

namespace thruwall::channel {

using TimeFunction = std::function<double(double t)>;
using FreqTimeFunction = std::function<double(double f, double t)>;

/// Lumped effect of the wall on every path crossing it.
struct WallChannelEffect {
  double amplitude_factor = 1.0;  // beta_wall, (0, 1]
  double phase_shift = 0.0;       // rad
  double extra_delay = 0.0;       // s

  void validate() const;
};

/// amplitude from the dB/m rate times thickness; delay from the sqrt(eps')
/// slowing inside the slab; phase from the two-interface transmission
/// coefficient of the lossy dielectric at `carrier_freq`.
WallChannelEffect wall_effect(const WallModel& wall, double carrier_freq);

enum class PathKind { static_path, dynamic_path };

/// One propagation path. The surface terms default to the identity
/// (gain 1, phase 0, delay 0) when left empty.
struct PathComponent {
  PathKind kind = PathKind::static_path;
  FreqTimeFunction attenuation;
  double base_phase = 0.0;
  TimeFunction delay;
  TimeFunction ris_gain;
  TimeFunction ris_phase;
  TimeFunction ris_delay;

  static PathComponent fixed(double amplitude, double phase, double delay);
  static PathComponent moving(FreqTimeFunction attenuation, double phase, TimeFunction delay);
};

struct Scene {
  WallModel wall;
  WallChannelEffect wall_effect;
  std::vector<PathComponent> paths;
  std::vector<double> freq_grid;  // Hz, strictly increasing
  std::vector<double> time_grid;  // s, strictly increasing
  double noise_variance = 0.0;    // linear, per complex sample
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct CsiFrame {
  ComplexMatrix data;  // [freq_bins x time_samples]
  double sample_rate = 0.0;
  std::optional<int> label;
};

/// `bins` bins centred in consecutive sub-bands of width bandwidth/bins.
std::vector<double> uniform_freq_grid(double center, double bandwidth, std::size_t bins);
std::vector<double> uniform_time_grid(double sample_rate, std::size_t samples);

/// Sum over paths of beta_wall * alpha(f,t) * exp(j(phi + phi_wall - 2 pi f (tau(t) + tau_wall)))
/// plus seeded circular Gaussian noise.
CsiFrame synthesize_csi(const Scene& scene);

/// Per-path surface terms derived from a configuration.
struct RisPathTerms {
  double gain = 1.0;
  double phase = 0.0;
  double delay = 0.0;
};

struct ElementCoupling {
  std::size_t element = 0;  // row-major element index
  Complex gain;             // cascade gain of that element for this path
};

/// Assignment of surface elements to paths. A path with an empty subset is
/// not routed through the surface and keeps the identity terms.
struct RisCoupling {
  ris::GridShape grid;
  std::vector<std::vector<ElementCoupling>> per_path;
  double max_gain = 16.0;

  static RisCoupling identity(ris::GridShape grid, std::size_t paths);
  /// Every path sees the full aperture through the same element gains.
  static RisCoupling full_aperture(ris::GridShape grid, std::size_t paths,
                                   const std::vector<Complex>& element_gains,
                                   double max_gain);
};

/// Coherent subset sum s = sum g_l w_l normalised by sqrt(sum |g_l|^2):
/// gain = min(|s| / norm, max_gain), phase = arg(s), delay = 0.
std::vector<RisPathTerms> resolve_ris_terms(const RisCoupling& coupling,
                                            const ris::PhaseMatrix& config);

/// Same as synthesize_csi with per-path surface terms substituted.
CsiFrame synthesize_csi_with_terms(const Scene& scene, const std::vector<RisPathTerms>& terms);

CsiFrame synthesize_csi_with_ris(const Scene& scene, const ris::PhaseMatrix& config,
                                 const RisCoupling& coupling);

}  // namespace thruwall::channel
