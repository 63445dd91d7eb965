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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thruwall/channel/csi.hpp"
#include "thruwall/ris/phase_matrix.hpp"

namespace thruwall::channel {

inline constexpr std::array<std::string_view, 6> kActivityClasses = {
    "kicking", "picking up", "sitting down", "standing", "standing up", "walking"};

/// Continuous scalar trajectory over time. Every shape is continuous.
struct Trajectory {
  enum class Shape { constant, sine, smoothstep, bump, ramp, burst };
  Shape shape = Shape::constant;
  double amplitude = 0.0;
  double onset = 0.0;      // s
  double duration = 1.0;   // s, for the windowed shapes
  double frequency = 0.0;  // Hz, for sine and burst

  double operator()(double t) const;
};

/// A body-part reflection: path length base_distance + sum(displacement),
/// amplitude base_amplitude * max(0, 1 + sum(amplitude_mod)).
struct DynamicPathTemplate {
  double base_distance = 5.0;  // m
  double base_amplitude = 0.3;
  std::vector<Trajectory> displacement;   // m
  std::vector<Trajectory> amplitude_mod;  // relative
};

struct Variability {
  double onset_jitter = 0.25;         // s, uniform +-
  double amplitude_jitter = 0.15;     // relative, uniform +-
  double displacement_jitter = 0.2;   // relative, uniform +-
  double distance_jitter = 0.5;       // m, uniform +-
  bool random_phase = true;
};

struct ActivityProfile {
  std::string class_name;
  std::vector<DynamicPathTemplate> dynamic_path_templates;
  Variability variability;
};

/// Built-in templates for the six classes, in kActivityClasses order.
std::vector<ActivityProfile> default_activity_profiles();
ActivityProfile default_profile(std::string_view class_name);
bool is_activity_class(std::string_view class_name);

/// Surface used to route every path of every sample through one aperture.
struct SurfaceSetup {
  ris::GridShape grid{16, 16};
  std::vector<Complex> element_gains;
  double max_gain = 16.0;
};

struct DatasetRequest {
  std::size_t samples_per_class = 50;
  bool with_ris = false;
  std::optional<ris::PhaseMatrix> config;
  std::optional<SurfaceSetup> surface;
  std::uint64_t seed = 0;
};

/// Adds the sampled dynamic paths of one activity realisation to a copy of
/// `scene_template`. Jitter and noise seeds derive from `sample_seed`.
Scene realize_activity(const ActivityProfile& profile, const Scene& scene_template,
                       std::uint64_t sample_seed);

/// Labeled frames, class-major: samples_per_class frames per profile. The
/// label is the profile's index in `profiles`. RIS-on and RIS-off requests
/// with equal seeds share every jitter and noise draw.
std::vector<CsiFrame> generate_activity_dataset(const std::vector<ActivityProfile>& profiles,
                                                const Scene& scene_template,
                                                const DatasetRequest& request);

}  // namespace thruwall::channel
