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

#include "thruwall/channel/csi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "thruwall/common/error.hpp"

namespace thruwall::channel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

TimeFunction constant(double v) {
  return [v](double) { return v; };
}

}  // namespace

void WallChannelEffect::validate() const {
  require(amplitude_factor > 0.0 && amplitude_factor <= 1.0, ErrorKind::invalid_argument,
          "wall amplitude factor must lie in (0, 1]");
  require(extra_delay >= 0.0, ErrorKind::invalid_argument, "wall delay must be >= 0");
}

WallChannelEffect wall_effect(const WallModel& wall, double carrier_freq) {
  require(carrier_freq > 0.0, ErrorKind::domain, "carrier frequency must be > 0");
  const double loss_db = wall_loss_db(wall);
  WallChannelEffect e;
  e.amplitude_factor = std::pow(10.0, -loss_db / 20.0);
  e.extra_delay = wall.thickness * (std::sqrt(wall.rel_permittivity_real) - 1.0) / kSpeedOfLight;
  const Complex eps{wall.rel_permittivity_real,
                    -wall.conductivity / (kTwoPi * carrier_freq * kVacuumPermittivity)};
  const Complex n = std::sqrt(eps);
  const Complex t = 4.0 * n / ((1.0 + n) * (1.0 + n));
  e.phase_shift = std::arg(t);
  return e;
}

PathComponent PathComponent::fixed(double amplitude, double phase, double delay) {
  PathComponent p;
  p.kind = PathKind::static_path;
  p.attenuation = [amplitude](double, double) { return amplitude; };
  p.base_phase = phase;
  p.delay = constant(delay);
  return p;
}

PathComponent PathComponent::moving(FreqTimeFunction attenuation, double phase, TimeFunction delay) {
  PathComponent p;
  p.kind = PathKind::dynamic_path;
  p.attenuation = std::move(attenuation);
  p.base_phase = phase;
  p.delay = std::move(delay);
  return p;
}

void Scene::validate() const {
  wall.validate();
  wall_effect.validate();
  require(!paths.empty(), ErrorKind::empty_scene, "scene has no propagation paths");
  require(!freq_grid.empty() && strictly_increasing(freq_grid), ErrorKind::invalid_argument,
          "frequency grid must be non-empty and strictly increasing");
  require(!time_grid.empty() && strictly_increasing(time_grid), ErrorKind::invalid_argument,
          "time grid must be non-empty and strictly increasing");
  require(noise_variance >= 0.0, ErrorKind::invalid_argument, "noise variance must be >= 0");
  for (const auto& p : paths) {
    require(static_cast<bool>(p.attenuation) && static_cast<bool>(p.delay),
            ErrorKind::invalid_argument, "path needs attenuation and delay functions");
  }
}

std::vector<double> uniform_freq_grid(double center, double bandwidth, std::size_t bins) {
  require(bins >= 1 && bandwidth > 0.0 && center > 0.0, ErrorKind::invalid_argument,
          "frequency grid needs positive center, bandwidth, and bin count");
  std::vector<double> f(bins);
  const double spacing = bandwidth / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    f[k] = center - bandwidth / 2.0 + (static_cast<double>(k) + 0.5) * spacing;
  }
  return f;
}

std::vector<double> uniform_time_grid(double sample_rate, std::size_t samples) {
  require(sample_rate > 0.0 && samples >= 1, ErrorKind::invalid_argument,
          "time grid needs a positive rate and at least one sample");
  std::vector<double> t(samples);
  for (std::size_t i = 0; i < samples; ++i) t[i] = static_cast<double>(i) / sample_rate;
  return t;
}

namespace {

CsiFrame synthesize(const Scene& scene) {
  scene.validate();
  const std::size_t F = scene.freq_grid.size();
  const std::size_t T = scene.time_grid.size();
  const std::size_t P = scene.paths.size();

  // Time-only quantities are evaluated once per path.
  std::vector<double> delay(P * T), gain(P * T), theta(P * T), ris_delay(P * T);
  for (std::size_t p = 0; p < P; ++p) {
    const auto& path = scene.paths[p];
    for (std::size_t i = 0; i < T; ++i) {
      const double t = scene.time_grid[i];
      const double d = path.delay(t);
      require(d >= 0.0 && std::isfinite(d), ErrorKind::domain, "path delay must be finite and >= 0");
      delay[p * T + i] = d;
      gain[p * T + i] = path.ris_gain ? path.ris_gain(t) : 1.0;
      theta[p * T + i] = path.ris_phase ? path.ris_phase(t) : 0.0;
      ris_delay[p * T + i] = path.ris_delay ? path.ris_delay(t) : 0.0;
    }
  }

  const auto& wall = scene.wall_effect;
  CsiFrame frame;
  frame.data = ComplexMatrix(F, T);
  frame.sample_rate = T > 1 ? 1.0 / (scene.time_grid[1] - scene.time_grid[0]) : 0.0;

#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < F; ++k) {
    const double f = scene.freq_grid[k];
    for (std::size_t i = 0; i < T; ++i) {
      const double t = scene.time_grid[i];
      Complex acc{0.0, 0.0};
      for (std::size_t p = 0; p < P; ++p) {
        const auto& path = scene.paths[p];
        const std::size_t pi = p * T + i;
        const double amp = wall.amplitude_factor * path.attenuation(f, t) * gain[pi];
        const double phase = path.base_phase + theta[pi] + wall.phase_shift -
                             kTwoPi * f * (delay[pi] + wall.extra_delay + ris_delay[pi]);
        acc += std::polar(amp, phase);
      }
      frame.data(k, i) = acc;
    }
  }

  if (scene.noise_variance > 0.0) {
    std::mt19937_64 rng(scene.rng_seed);
    std::normal_distribution<double> n(0.0, std::sqrt(scene.noise_variance / 2.0));
    for (auto& v : frame.data.data()) v += Complex{n(rng), n(rng)};
  }
  return frame;
}

}  // namespace

CsiFrame synthesize_csi(const Scene& scene) { return synthesize(scene); }

RisCoupling RisCoupling::identity(ris::GridShape grid, std::size_t paths) {
  RisCoupling c;
  c.grid = grid;
  c.per_path.assign(paths, {});
  return c;
}

RisCoupling RisCoupling::full_aperture(ris::GridShape grid, std::size_t paths,
                                       const std::vector<Complex>& element_gains,
                                       double max_gain) {
  require(element_gains.size() == grid.elements(), ErrorKind::dimension,
          "element gains do not match the surface size");
  RisCoupling c;
  c.grid = grid;
  c.max_gain = max_gain;
  std::vector<ElementCoupling> all(element_gains.size());
  for (std::size_t l = 0; l < element_gains.size(); ++l) all[l] = {l, element_gains[l]};
  c.per_path.assign(paths, all);
  return c;
}

std::vector<RisPathTerms> resolve_ris_terms(const RisCoupling& coupling,
                                            const ris::PhaseMatrix& config) {
  require(config.shape() == coupling.grid, ErrorKind::dimension,
          "configuration is " + std::to_string(config.rows()) + "x" + std::to_string(config.cols()) +
              " but the scene surface is " + std::to_string(coupling.grid.rows) + "x" +
              std::to_string(coupling.grid.cols));
  require(coupling.max_gain > 0.0, ErrorKind::invalid_argument, "max surface gain must be > 0");
  std::vector<RisPathTerms> terms(coupling.per_path.size());
  for (std::size_t p = 0; p < coupling.per_path.size(); ++p) {
    const auto& subset = coupling.per_path[p];
    if (subset.empty()) continue;
    Complex sum{0.0, 0.0};
    double energy = 0.0;
    for (const auto& e : subset) {
      require(e.element < config.elements(), ErrorKind::dimension, "coupled element out of range");
      sum += e.gain * config.coefficient(e.element);
      energy += std::norm(e.gain);
    }
    require(energy > 0.0, ErrorKind::invalid_argument, "path couples only to zero-gain elements");
    terms[p].gain = std::min(std::abs(sum) / std::sqrt(energy), coupling.max_gain);
    terms[p].phase = std::arg(sum);
    terms[p].delay = 0.0;
  }
  return terms;
}

CsiFrame synthesize_csi_with_terms(const Scene& scene, const std::vector<RisPathTerms>& terms) {
  require(terms.size() == scene.paths.size(), ErrorKind::dimension,
          "one set of surface terms is needed per path");
  Scene routed = scene;
  for (std::size_t p = 0; p < terms.size(); ++p) {
    routed.paths[p].ris_gain = constant(terms[p].gain);
    routed.paths[p].ris_phase = constant(terms[p].phase);
    routed.paths[p].ris_delay = constant(terms[p].delay);
  }
  return synthesize(routed);
}

CsiFrame synthesize_csi_with_ris(const Scene& scene, const ris::PhaseMatrix& config,
                                 const RisCoupling& coupling) {
  require(coupling.per_path.size() == scene.paths.size(), ErrorKind::dimension,
          "coupling does not cover every path of the scene");
  return synthesize_csi_with_terms(scene, resolve_ris_terms(coupling, config));
}

}  // namespace thruwall::channel
