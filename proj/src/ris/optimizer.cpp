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

#include "thruwall/ris/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "thruwall/common/error.hpp"
#include "thruwall/common/random.hpp"

namespace thruwall::ris {

std::vector<Complex> CascadeChannel::element_gains() const {
  std::vector<Complex> g(h1.size());
  for (std::size_t l = 0; l < h1.size(); ++l) g[l] = std::conj(h1[l]) * h2[l];
  return g;
}

void CascadeChannel::validate() const {
  require(!h1.empty() && h1.size() == h2.size(), ErrorKind::dimension,
          "cascade vectors must be non-empty and of equal length");
  require(averaging_samples >= 1, ErrorKind::invalid_argument, "averaging_samples must be >= 1");
  require(tx_symbol_power >= 0.0 && noise_variance >= 0.0, ErrorKind::invalid_argument,
          "powers must be non-negative");
  for (std::size_t l = 0; l < h1.size(); ++l) {
    require(std::isfinite(h1[l].real()) && std::isfinite(h1[l].imag()) &&
                std::isfinite(h2[l].real()) && std::isfinite(h2[l].imag()),
            ErrorKind::invalid_argument, "cascade vectors must be finite");
  }
}

CascadeChannel CascadeChannel::from_gains(const std::vector<Complex>& gains) {
  CascadeChannel c;
  c.h1.assign(gains.size(), Complex{1.0, 0.0});
  c.h2 = gains;
  return c;
}

CascadeChannel random_cascade(std::size_t elements, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  CascadeChannel c;
  c.h1.resize(elements);
  c.h2.resize(elements);
  for (auto& v : c.h1) v = {n(rng), n(rng)};
  for (auto& v : c.h2) v = {n(rng), n(rng)};
  return c;
}

Complex combined_gain(const PhaseMatrix& config, const CascadeChannel& chan) {
  require(config.elements() == chan.elements(), ErrorKind::dimension,
          "configuration has " + std::to_string(config.elements()) +
              " elements but the channel has " + std::to_string(chan.elements()));
  Complex acc{0.0, 0.0};
  for (std::size_t l = 0; l < chan.elements(); ++l) {
    acc += std::conj(chan.h1[l]) * config.coefficient(l) * chan.h2[l];
  }
  return acc;
}

double measure_power(const PhaseMatrix& config, const CascadeChannel& chan, std::uint64_t seed) {
  chan.validate();
  const Complex g = combined_gain(config, chan);
  if (chan.noise_variance == 0.0) return std::norm(g) * chan.tx_symbol_power;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, std::sqrt(chan.noise_variance / 2.0));
  const Complex signal = g * std::sqrt(chan.tx_symbol_power);
  double acc = 0.0;
  for (std::size_t k = 0; k < chan.averaging_samples; ++k) {
    const Complex y = signal + Complex{n(rng), n(rng)};
    acc += std::norm(y);
  }
  return acc / static_cast<double>(chan.averaging_samples);
}

std::vector<bool> PowerTrace::accepted_flips() const {
  std::vector<bool> out;
  for (std::size_t i = 1; i < trials.size(); ++i) out.push_back(trials[i].accepted);
  return out;
}

GreedyResult greedy_optimize(GridShape grid, const PowerMeter& measure) {
  PhaseMatrix config(grid, PhaseState::minus_half_pi);
  PowerTrace trace;
  auto checked = [&](const PhaseMatrix& c) {
    const double p = measure(c);
    require(std::isfinite(p), ErrorKind::invalid_argument, "power meter returned a non-finite value");
    return p;
  };

  double prev = checked(config);
  trace.values.push_back(prev);
  trace.trials.push_back({FlipKind::none, 0, prev, true});

  auto trial = [&](FlipKind kind, std::size_t index) {
    PhaseMatrix candidate = config;
    if (kind == FlipKind::row) candidate.toggle_row(index);
    else candidate.toggle_col(index);
    const double p = checked(candidate);
    const bool keep = p > prev;
    if (keep) {
      config = std::move(candidate);
      prev = p;
    }
    trace.values.push_back(prev);
    trace.trials.push_back({kind, index, p, keep});
  };

  for (std::size_t m = 0; m < grid.rows; ++m) trial(FlipKind::row, m);
  for (std::size_t n = 0; n < grid.cols; ++n) trial(FlipKind::col, n);
  return {std::move(config), std::move(trace)};
}

GreedyResult greedy_optimize(GridShape grid, const CascadeChannel& chan) {
  require(grid.elements() == chan.elements(), ErrorKind::dimension,
          "grid does not match channel length");
  return greedy_optimize(grid, [&](const PhaseMatrix& c) { return measure_power(c, chan, 0); });
}

OracleResult exhaustive_oracle(GridShape grid, const CascadeChannel& chan, std::size_t max_elements) {
  const std::size_t L = grid.elements();
  require(L == chan.elements(), ErrorKind::dimension, "grid does not match channel length");
  require(L <= max_elements && L < 63, ErrorKind::refusal,
          "exhaustive search over " + std::to_string(L) + " elements exceeds the bound of " +
              std::to_string(max_elements));
  chan.validate();

  const auto gains = chan.element_gains();
  OracleResult best{PhaseMatrix(grid, PhaseState::minus_half_pi), -1.0};
  const std::uint64_t total = std::uint64_t{1} << L;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    Complex acc{0.0, 0.0};
    for (std::size_t l = 0; l < L; ++l) {
      const Complex w = (mask >> l) & 1U ? Complex{0.0, 1.0} : Complex{0.0, -1.0};
      acc += gains[l] * w;
    }
    const double p = std::norm(acc) * chan.tx_symbol_power;
    if (p > best.power) {
      std::vector<int> mult(L);
      for (std::size_t l = 0; l < L; ++l) mult[l] = (mask >> l) & 1U ? 1 : -1;
      best = {PhaseMatrix::from_multipliers(grid, mult), p};
    }
  }
  return best;
}

CascadeChannel draw_channel(const ChannelModelSpec& model, std::size_t L, std::uint64_t seed) {
  switch (model.kind) {
    case ChannelModelKind::iid_gaussian: {
      std::mt19937_64 rng(seed);
      return random_cascade(L, rng);
    }
    case ChannelModelKind::aligned: {
      // Every cascade gain has the same phase, so the uniform start is coherent.
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> mag(0.5, 1.5);
      std::vector<Complex> g(L);
      for (auto& v : g) v = {mag(rng), 0.0};
      return CascadeChannel::from_gains(g);
    }
    case ChannelModelKind::fixed:
      require(model.fixed.elements() == L, ErrorKind::dimension,
              "fixed channel does not match the grid");
      return model.fixed;
  }
  throw Error(ErrorKind::invalid_argument, "unknown channel model");
}

namespace {

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

GainReport array_gain_report(std::size_t trials, GridShape grid, const ChannelModelSpec& model,
                             std::uint64_t seed) {
  require(trials >= 1, ErrorKind::invalid_argument, "trials must be >= 1");
  GainReport report;
  report.trials.resize(trials);
  const std::size_t L = grid.elements();

  // Trials are independent; each writes only its own slot.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < trials; ++t) {
    const CascadeChannel chan = draw_channel(model, L, derive_seed(seed, {t}));
    const GreedyResult r = greedy_optimize(grid, chan);
    GainTrial& out = report.trials[t];
    out.initial_power = r.trace.values.front();
    out.final_power = r.trace.values.back();
    out.floored = out.initial_power <= 0.0;
    const double denom = out.floored ? kPowerFloor : out.initial_power;
    out.gain_db = 10.0 * std::log10(std::max(out.final_power, kPowerFloor) / denom);
  }

  std::vector<double> gains;
  gains.reserve(trials);
  for (const auto& t : report.trials) {
    gains.push_back(t.gain_db);
    if (t.floored) ++report.floored_trials;
  }
  const double n = static_cast<double>(trials);
  report.mean_db = std::accumulate(gains.begin(), gains.end(), 0.0) / n;
  double var = 0.0;
  for (double g : gains) var += (g - report.mean_db) * (g - report.mean_db);
  report.stddev_db = trials > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  report.min_db = *std::min_element(gains.begin(), gains.end());
  report.max_db = *std::max_element(gains.begin(), gains.end());
  report.p05_db = percentile(gains, 0.05);
  report.p50_db = percentile(gains, 0.50);
  report.p95_db = percentile(gains, 0.95);
  return report;
}

}  // namespace thruwall::ris
