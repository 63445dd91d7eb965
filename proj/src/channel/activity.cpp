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

#include "thruwall/channel/activity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "thruwall/common/error.hpp"
#include "thruwall/common/random.hpp"

namespace thruwall::channel {

namespace {

constexpr double kPi = std::numbers::pi;

double unit_clamp(double x) { return std::clamp(x, 0.0, 1.0); }

using Shape = Trajectory::Shape;

Trajectory constant(double a) { return {Shape::constant, a, 0.0, 1.0, 0.0}; }
Trajectory sine(double a, double hz, double onset = 0.0) { return {Shape::sine, a, onset, 1.0, hz}; }
Trajectory smoothstep(double a, double onset, double dur) { return {Shape::smoothstep, a, onset, dur, 0.0}; }
Trajectory bump(double a, double onset, double dur) { return {Shape::bump, a, onset, dur, 0.0}; }
Trajectory ramp(double a, double onset, double dur) { return {Shape::ramp, a, onset, dur, 0.0}; }
Trajectory burst(double a, double hz, double onset, double dur) { return {Shape::burst, a, onset, dur, hz}; }

double sum_at(const std::vector<Trajectory>& parts, double t) {
  double s = 0.0;
  for (const auto& p : parts) s += p(t);
  return s;
}

}  // namespace

double Trajectory::operator()(double t) const {
  const double x = duration > 0.0 ? unit_clamp((t - onset) / duration) : (t >= onset ? 1.0 : 0.0);
  switch (shape) {
    case Shape::constant: return amplitude;
    case Shape::sine: return amplitude * std::sin(2.0 * kPi * frequency * (t - onset));
    case Shape::smoothstep: return amplitude * x * x * (3.0 - 2.0 * x);
    case Shape::bump: return amplitude * std::sin(kPi * x);
    case Shape::ramp: return amplitude * x;
    case Shape::burst:
      return amplitude * std::sin(2.0 * kPi * frequency * (t - onset)) * std::sin(kPi * x);
  }
  return 0.0;
}

std::vector<ActivityProfile> default_activity_profiles() {
  // Two reflections per activity: torso (nearer, stronger) and a limb.
  // Path-length speeds stay under ~0.4 m/s so amplitude fringes sit below
  // 10 Hz at 5.8 GHz.
  std::vector<ActivityProfile> out;
  auto add = [&](std::string name, DynamicPathTemplate torso, DynamicPathTemplate limb) {
    out.push_back({std::move(name), {std::move(torso), std::move(limb)}, Variability{}});
  };

  add("kicking",
      {5.0, 0.35, {sine(0.01, 0.3)}, {}},
      {5.4, 0.22, {burst(0.05, 1.2, 0.9, 1.2)}, {bump(0.6, 0.9, 1.2)}});
  add("picking up",
      {5.0, 0.35, {bump(0.22, 0.6, 1.8)}, {bump(-0.35, 0.6, 1.8)}},
      {5.4, 0.22, {bump(0.15, 0.7, 1.6)}, {}});
  add("sitting down",
      {5.0, 0.35, {smoothstep(0.22, 0.9, 0.9)}, {smoothstep(-0.4, 0.9, 0.9)}},
      {5.4, 0.22, {smoothstep(0.10, 1.0, 0.8)}, {}});
  add("standing",
      {5.0, 0.35, {sine(0.01, 0.25)}, {}},
      {5.4, 0.22, {sine(0.008, 0.4)}, {}});
  add("standing up",
      {5.0, 0.35, {constant(0.22), smoothstep(-0.22, 0.8, 1.4)},
       {constant(-0.4), smoothstep(0.4, 0.8, 1.4)}},
      {5.4, 0.22, {constant(0.10), smoothstep(-0.10, 0.9, 1.3)}, {}});
  add("walking",
      {5.0, 0.35, {ramp(0.9, 0.0, 3.0), sine(0.02, 1.8)}, {ramp(-0.35, 0.0, 3.0)}},
      {5.4, 0.22, {ramp(0.9, 0.0, 3.0), sine(0.05, 0.9)}, {}});
  return out;
}

bool is_activity_class(std::string_view class_name) {
  return std::find(kActivityClasses.begin(), kActivityClasses.end(), class_name) !=
         kActivityClasses.end();
}

ActivityProfile default_profile(std::string_view class_name) {
  require(is_activity_class(class_name), ErrorKind::configuration,
          "unknown activity class '" + std::string(class_name) + "'");
  for (auto& p : default_activity_profiles()) {
    if (p.class_name == class_name) return p;
  }
  throw Error(ErrorKind::configuration, "no template for activity class");
}

Scene realize_activity(const ActivityProfile& profile, const Scene& scene_template,
                       std::uint64_t sample_seed) {
  require(is_activity_class(profile.class_name), ErrorKind::configuration,
          "unknown activity class '" + profile.class_name + "'");
  const auto& v = profile.variability;
  std::mt19937_64 rng(sample_seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);

  const double onset_shift = v.onset_jitter * sym(rng);
  const double amp_scale = 1.0 + v.amplitude_jitter * sym(rng);
  const double disp_scale = 1.0 + v.displacement_jitter * sym(rng);
  const double distance_offset = v.distance_jitter * sym(rng);

  Scene scene = scene_template;
  scene.rng_seed = derive_seed(sample_seed, {0x6e6f697365ULL});
  for (const auto& tmpl : profile.dynamic_path_templates) {
    std::vector<Trajectory> disp = tmpl.displacement;
    std::vector<Trajectory> mod = tmpl.amplitude_mod;
    for (auto& d : disp) {
      d.onset += onset_shift;
      d.amplitude *= disp_scale;
    }
    for (auto& m : mod) m.onset += onset_shift;
    const double base = std::max(0.1, tmpl.base_distance + distance_offset);
    const double amplitude = tmpl.base_amplitude * amp_scale;
    const double phase = v.random_phase ? angle(rng) : 0.0;

    auto delay = [disp, base](double t) {
      return std::max(0.0, base + sum_at(disp, t)) / kSpeedOfLight;
    };
    auto attenuation = [mod, amplitude](double, double t) {
      return amplitude * std::max(0.0, 1.0 + sum_at(mod, t));
    };
    scene.paths.push_back(PathComponent::moving(attenuation, phase, delay));
  }
  return scene;
}

std::vector<CsiFrame> generate_activity_dataset(const std::vector<ActivityProfile>& profiles,
                                                const Scene& scene_template,
                                                const DatasetRequest& request) {
  require(request.samples_per_class >= 1, ErrorKind::configuration,
          "samples_per_class must be >= 1");
  require(!profiles.empty(), ErrorKind::configuration, "no activity profiles given");
  for (const auto& p : profiles) {
    require(is_activity_class(p.class_name), ErrorKind::configuration,
            "unknown activity class '" + p.class_name + "'");
  }
  if (request.with_ris) {
    require(request.config.has_value() && request.surface.has_value(), ErrorKind::configuration,
            "surface-enabled generation needs a phase configuration and a surface setup");
  }

  std::vector<CsiFrame> frames;
  frames.reserve(profiles.size() * request.samples_per_class);
  for (std::size_t c = 0; c < profiles.size(); ++c) {
    for (std::size_t s = 0; s < request.samples_per_class; ++s) {
      const Scene scene = realize_activity(profiles[c], scene_template,
                                           derive_seed(request.seed, {c, s}));
      CsiFrame frame;
      if (request.with_ris) {
        const auto& surf = *request.surface;
        const auto coupling = RisCoupling::full_aperture(surf.grid, scene.paths.size(),
                                                         surf.element_gains, surf.max_gain);
        frame = synthesize_csi_with_ris(scene, *request.config, coupling);
      } else {
        frame = synthesize_csi(scene);
      }
      frame.label = static_cast<int>(c);
      frames.push_back(std::move(frame));
    }
  }
  return frames;
}

}  // namespace thruwall::channel
