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

#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "thruwall/channel/activity.hpp"
#include "thruwall/channel/csi.hpp"
#include "thruwall/channel/link_budget.hpp"
#include "thruwall/common/error.hpp"

using namespace thruwall;
using namespace thruwall::channel;

namespace {

constexpr double kC = 299792458.0;

Scene bare_scene(std::vector<PathComponent> paths) {
  Scene s;
  s.wall = {1.0, 0.0, 0.0};
  s.wall_effect = {};
  s.paths = std::move(paths);
  s.freq_grid = uniform_freq_grid(5.8e9, 160e6, 8);
  s.time_grid = uniform_time_grid(50.0, 6);
  return s;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("wall attenuation rate") {
  CHECK(wall_attenuation_rate({5.5, 0.11, 1.0}) == doctest::Approx(76.74).epsilon(1e-4));
  CHECK(wall_attenuation_rate({3.58, 0.11, 1.0}) == doctest::Approx(95.11).epsilon(1e-4));
  CHECK(wall_attenuation_rate({5.5, 0.11, 1.0}) ==
        doctest::Approx(1636.0 * 0.11 / std::sqrt(5.5)).epsilon(1e-12));
  CHECK(wall_attenuation_rate({1.0, 0.0, 1.0}) == 0.0);
  CHECK(wall_loss_db({5.5, 0.11, 0.5}) == doctest::Approx(0.5 * 1636.0 * 0.11 / std::sqrt(5.5)));
}

TEST_CASE("wall attenuation is monotone in conductivity and permittivity") {
  for (double eps = 1.0; eps <= 10.0; eps += 0.5) {
    double prev = -1.0;
    for (double sigma = 0.0; sigma <= 1.0; sigma += 0.05) {
      const double r = wall_attenuation_rate({eps, sigma, 1.0});
      CHECK(r > prev);
      prev = r;
    }
  }
  for (double sigma = 0.01; sigma <= 1.0; sigma += 0.1) {
    double prev = 1e300;
    for (double eps = 1.0; eps <= 10.0; eps += 0.25) {
      const double r = wall_attenuation_rate({eps, sigma, 1.0});
      CHECK(r < prev);
      prev = r;
    }
  }
}

TEST_CASE("invalid wall material is rejected") {
  CHECK_THROWS_AS(wall_attenuation_rate({0.5, 0.1, 1.0}), Error);
  CHECK_THROWS_AS(wall_attenuation_rate({5.5, -0.1, 1.0}), Error);
}

TEST_CASE("free-space term") {
  CHECK(free_space_term(5.8e9, 1.0) == doctest::Approx(-47.72).epsilon(1e-4));
  CHECK(free_space_term(5.8e9, 3.8) == doctest::Approx(-59.31).epsilon(1e-4));
  const double lambda = kC / 5.8e9;
  CHECK(free_space_term(5.8e9, 3.8) ==
        doctest::Approx(20.0 * std::log10(lambda / (4.0 * std::numbers::pi * 3.8))).epsilon(1e-12));
}

TEST_CASE("log-distance path loss") {
  LinkBudget b;
  b.path_loss_exponent = 2.0;
  b.reference_distance = 1.0;
  b.distance = 1.0;
  CHECK(log_distance_path_loss(b, 40.0) == doctest::Approx(40.0));
  b.distance = 10.0;
  CHECK(log_distance_path_loss(b, 40.0) == doctest::Approx(60.0));
  b.path_loss_exponent = 3.0;
  b.distance = 2.0;
  CHECK(log_distance_path_loss(b, 46.4) == doctest::Approx(55.43).epsilon(1e-4));
}

TEST_CASE("received power closes the reference budget with the calibrated wall") {
  LinkBudget b;  // reference defaults
  const WallModel wall{5.5, 0.11, 1.0};
  const double thickness = calibrate_wall_thickness(b, wall, -98.52);
  // Independent evaluation of the same budget.
  const double fs = 20.0 * std::log10(kC / 5.8e9 / (4.0 * std::numbers::pi * 3.8));
  const double open = 17.0 + 15.8 + 15.8 + 14.0 + fs - 13.0 * 1.27;
  CHECK(received_power(b) == doctest::Approx(open).epsilon(1e-12));
  CHECK(thickness == doctest::Approx((open + 98.52) / (1636.0 * 0.11 / std::sqrt(5.5))));
  b.obstruction_losses = {wall_loss_db({5.5, 0.11, thickness})};
  CHECK(received_power(b) == doctest::Approx(-98.52).epsilon(1e-9));
}

TEST_CASE("identity budget returns the transmit power") {
  LinkBudget b;
  b.tx_gain = b.rx_gain = b.amp_gain = 0.0;
  b.cable_length = 0.0;
  b.carrier_freq = 2.4e9;
  b.distance = kC / b.carrier_freq / (4.0 * std::numbers::pi);  // lambda / (4 pi d) = 1
  CHECK(received_power(b) == doctest::Approx(b.tx_power).epsilon(1e-12));
}

TEST_CASE("received power is affine with unit coefficients in every dB input") {
  LinkBudget base;
  base.obstruction_losses = {30.0, 5.0};
  const double p0 = received_power(base);
  const double d = 0.731;
  auto perturbed = [&](auto mutate) {
    LinkBudget b = base;
    mutate(b);
    return received_power(b) - p0;
  };
  CHECK(perturbed([&](LinkBudget& b) { b.tx_power += d; }) == doctest::Approx(d));
  CHECK(perturbed([&](LinkBudget& b) { b.tx_gain += d; }) == doctest::Approx(d));
  CHECK(perturbed([&](LinkBudget& b) { b.rx_gain += d; }) == doctest::Approx(d));
  CHECK(perturbed([&](LinkBudget& b) { b.amp_gain += d; }) == doctest::Approx(d));
  CHECK(perturbed([&](LinkBudget& b) { b.obstruction_losses[0] += d; }) == doctest::Approx(-d));
  CHECK(perturbed([&](LinkBudget& b) { b.obstruction_losses[1] += d; }) == doctest::Approx(-d));
  CHECK(perturbed([&](LinkBudget& b) { b.cable_length += d / b.cable_loss_rate; }) ==
        doctest::Approx(-d));
}

TEST_CASE("wall effect") {
  const WallModel wall{5.5, 0.11, 0.2};
  const auto e = wall_effect(wall, 5.8e9);
  CHECK(e.amplitude_factor == doctest::Approx(std::pow(10.0, -wall_loss_db(wall) / 20.0)));
  CHECK(e.extra_delay == doctest::Approx(0.2 * (std::sqrt(5.5) - 1.0) / kC));
  CHECK(std::abs(e.phase_shift) < std::numbers::pi / 2);
  const auto none = wall_effect({1.0, 0.0, 0.0}, 5.8e9);
  CHECK(none.amplitude_factor == doctest::Approx(1.0));
  CHECK(none.extra_delay == 0.0);
  CHECK(std::abs(none.phase_shift) < 1e-15);
}

TEST_CASE("single static path with no wall is all ones") {
  const auto frame = synthesize_csi(bare_scene({PathComponent::fixed(1.0, 0.0, 0.0)}));
  for (const auto& v : frame.data.data()) {
    CHECK(v.real() == doctest::Approx(1.0));
    CHECK(std::abs(v.imag()) < 1e-15);
  }
}

TEST_CASE("opposite-phase paths cancel") {
  const auto frame = synthesize_csi(bare_scene(
      {PathComponent::fixed(1.0, 0.0, 0.0), PathComponent::fixed(1.0, std::numbers::pi, 0.0)}));
  for (const auto& v : frame.data.data()) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("synthesis is linear in the path set and reproducible") {
  auto a = PathComponent::fixed(0.7, 0.3, 12e-9);
  auto b = PathComponent::moving([](double f, double t) { return 0.2 + 0.1 * std::sin(t) + f * 1e-12; },
                                 1.1, [](double t) { return 20e-9 + 1e-9 * t; });
  Scene s = bare_scene({a, b});
  s.wall = {5.5, 0.11, 0.1};
  s.wall_effect = wall_effect(s.wall, 5.8e9);
  Scene sa = s, sb = s;
  sa.paths = {a};
  sb.paths = {b};
  const auto both = synthesize_csi(s);
  const auto fa = synthesize_csi(sa);
  const auto fb = synthesize_csi(sb);
  double m = 0.0;
  for (std::size_t i = 0; i < both.data.size(); ++i)
    m = std::max(m, std::abs(both.data.data()[i] - fa.data.data()[i] - fb.data.data()[i]));
  CHECK(m < 1e-15);
  CHECK(synthesize_csi(s).data == both.data);
}

TEST_CASE("CSI entries obey the triangle bound") {
  auto b = PathComponent::moving([](double, double t) { return 0.5 + 0.4 * std::cos(3 * t); }, 0.2,
                                 [](double t) { return 15e-9 + 2e-9 * t; });
  Scene s = bare_scene({PathComponent::fixed(1.0, 0.0, 10e-9), PathComponent::fixed(0.45, 1.0, 17e-9), b});
  s.wall = {5.5, 0.11, 0.05};
  s.wall_effect = wall_effect(s.wall, 5.8e9);
  const auto frame = synthesize_csi(s);
  for (std::size_t t = 0; t < s.time_grid.size(); ++t) {
    const double bound =
        s.wall_effect.amplitude_factor * (1.0 + 0.45 + (0.5 + 0.4 * std::cos(3 * s.time_grid[t])));
    for (std::size_t f = 0; f < s.freq_grid.size(); ++f) CHECK(std::abs(frame.data(f, t)) <= bound + 1e-15);
  }
}

TEST_CASE("noise is seeded") {
  Scene s = bare_scene({PathComponent::fixed(1.0, 0.0, 0.0)});
  s.noise_variance = 0.1;
  s.rng_seed = 7;
  const auto a = synthesize_csi(s);
  CHECK(a.data == synthesize_csi(s).data);
  s.rng_seed = 8;
  CHECK_FALSE(a.data == synthesize_csi(s).data);
}

TEST_CASE("identity surface mapping reproduces plain synthesis") {
  Scene s = bare_scene({PathComponent::fixed(1.0, 0.0, 10e-9), PathComponent::fixed(0.3, 2.0, 20e-9)});
  s.wall = {5.5, 0.11, 0.1};
  s.wall_effect = wall_effect(s.wall, 5.8e9);
  s.noise_variance = 0.01;
  s.rng_seed = 3;
  const ris::GridShape grid{4, 4};
  const auto cfg = ris::PhaseMatrix::uniform(grid, ris::PhaseState::plus_half_pi);
  const auto with = synthesize_csi_with_ris(s, cfg, RisCoupling::identity(grid, s.paths.size()));
  CHECK(max_abs_diff(with.data, synthesize_csi(s).data) == 0.0);
}

TEST_CASE("surface phase chosen to cancel the wall phase") {
  Scene s = bare_scene({PathComponent::fixed(0.9, 0.4, 10e-9), PathComponent::fixed(0.5, -1.2, 23e-9)});
  s.wall = {5.5, 0.11, 0.1};
  s.wall_effect = wall_effect(s.wall, 5.8e9);
  const double pw = s.wall_effect.phase_shift;
  REQUIRE(std::abs(pw) > 1e-6);

  // One element per path; its gain times +j has phase -phi_wall.
  const ris::GridShape grid{1, 2};
  RisCoupling c;
  c.grid = grid;
  const Complex g = std::polar(1.0, -pw - std::numbers::pi / 2);
  c.per_path = {{{0, g}}, {{1, g}}};
  const auto cfg = ris::PhaseMatrix::uniform(grid, ris::PhaseState::plus_half_pi);
  const auto got = synthesize_csi_with_ris(s, cfg, c);

  // Direct evaluation with the wall phase removed.
  const double beta = s.wall_effect.amplitude_factor;
  const double tw = s.wall_effect.extra_delay;
  for (std::size_t f = 0; f < s.freq_grid.size(); ++f) {
    const double fr = s.freq_grid[f];
    const Complex want = beta * (std::polar(0.9, 0.4 - 2 * std::numbers::pi * fr * (10e-9 + tw)) +
                                 std::polar(0.5, -1.2 - 2 * std::numbers::pi * fr * (23e-9 + tw)));
    for (std::size_t t = 0; t < s.time_grid.size(); ++t)
      CHECK(std::abs(got.data(f, t) - want) < 1e-12);
  }
}

TEST_CASE("full-aperture coupling is the normalised coherent sum") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::vector<Complex> g(16);
  for (auto& v : g) v = {n(rng), n(rng)};
  const ris::GridShape grid{4, 4};
  auto cfg = ris::PhaseMatrix::uniform(grid, ris::PhaseState::minus_half_pi);
  cfg.toggle(0, 1);
  cfg.toggle(3, 2);
  const auto terms = resolve_ris_terms(RisCoupling::full_aperture(grid, 2, g, 16.0), cfg);
  Complex s{};
  double norm = 0.0;
  for (std::size_t l = 0; l < 16; ++l) {
    s += g[l] * cfg.coefficient(l);
    norm += std::norm(g[l]);
  }
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].gain == doctest::Approx(std::abs(s) / std::sqrt(norm)));
  CHECK(terms[0].phase == doctest::Approx(std::arg(s)));
  CHECK(terms[0].delay == 0.0);
  CHECK(terms[1].gain == terms[0].gain);
  CHECK(resolve_ris_terms(RisCoupling::full_aperture(grid, 1, g, 0.5), cfg)[0].gain <= 0.5);
}

TEST_CASE("surface shape mismatch is a dimension error") {
  Scene s = bare_scene({PathComponent::fixed(1.0, 0.0, 0.0)});
  const auto cfg = ris::PhaseMatrix::uniform({2, 2}, ris::PhaseState::plus_half_pi);
  try {
    synthesize_csi_with_ris(s, cfg, RisCoupling::identity({3, 3}, 1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
}

TEST_CASE("empty scene is rejected") {
  CHECK_THROWS_AS(synthesize_csi(bare_scene({})), Error);
}

TEST_CASE("activity dataset: count, labels and determinism") {
  Scene tmpl = bare_scene({PathComponent::fixed(1.0, 0.0, 12e-9)});
  tmpl.time_grid = uniform_time_grid(50.0, 150);
  tmpl.noise_variance = 1e-3;
  DatasetRequest req;
  req.samples_per_class = 50;
  req.seed = 11;
  const auto frames = generate_activity_dataset(default_activity_profiles(), tmpl, req);
  REQUIRE(frames.size() == 300);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(frames[i].label.value() == static_cast<int>(i / 50));
    CHECK(frames[i].data.rows() == 8);
    CHECK(frames[i].data.cols() == 150);
    CHECK(frames[i].sample_rate == doctest::Approx(50.0));
  }

  auto profiles = default_activity_profiles();
  for (auto& p : profiles) p.variability = {0.0, 0.0, 0.0, 0.0, false};
  req.samples_per_class = 1;
  const auto a = generate_activity_dataset(profiles, tmpl, req);
  const auto b = generate_activity_dataset(profiles, tmpl, req);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);
}

TEST_CASE("surface-on and surface-off datasets share draws") {
  Scene tmpl = bare_scene({PathComponent::fixed(1.0, 0.0, 12e-9)});
  const ris::GridShape grid{2, 2};
  DatasetRequest off;
  off.samples_per_class = 2;
  off.seed = 4;
  DatasetRequest on = off;
  on.with_ris = true;
  on.config = ris::PhaseMatrix::uniform(grid, ris::PhaseState::plus_half_pi);
  on.surface = SurfaceSetup{grid, {Complex{1, 0}, Complex{1, 0}, Complex{1, 0}, Complex{1, 0}}, 16.0};
  // Aligned unit gains: coherent gain 2 with phase +pi/2 on every path.
  const auto profiles = default_activity_profiles();
  const auto a = generate_activity_dataset(profiles, tmpl, off);
  const auto b = generate_activity_dataset(profiles, tmpl, on);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a[i].data.size(); ++k)
      CHECK(std::abs(b[i].data.data()[k] - Complex{0, 2} * a[i].data.data()[k]) < 1e-12);
}

TEST_CASE("surface-on generation without a configuration is a configuration error") {
  DatasetRequest req;
  req.with_ris = true;
  CHECK_THROWS_AS(generate_activity_dataset(default_activity_profiles(),
                                            bare_scene({PathComponent::fixed(1, 0, 0)}), req),
                  Error);
}

TEST_CASE("trajectories are continuous") {
  using S = Trajectory::Shape;
  for (S shape : {S::constant, S::sine, S::smoothstep, S::bump, S::ramp, S::burst}) {
    Trajectory tr{shape, 0.3, 0.7, 1.2, 1.5};
    for (double t = 0.0; t < 3.0; t += 1e-3) CHECK(std::abs(tr(t + 1e-7) - tr(t)) < 1e-5);
  }
}
