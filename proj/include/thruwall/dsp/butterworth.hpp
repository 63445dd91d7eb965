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

#include <span>
#include <vector>

#include "thruwall/common/matrix.hpp"

namespace thruwall::dsp {

struct FilterSpec {
  int order = 4;
  double cutoff_hz = 10.0;
  double sample_rate_hz = 50.0;

  void validate() const;
};

/// Transposed direct-form II biquad, a0 normalised to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct SosFilter {
  std::vector<Biquad> sections;
};

/// Low-pass Butterworth from the analog prototype via the bilinear
/// transform, with the cutoff prewarped so |H| = 1/sqrt(2) exactly at
/// cutoff_hz. Each section has unit DC gain.
SosFilter design_butterworth(const FilterSpec& spec);

/// |H(e^{j 2 pi f / fs})| of the cascade.
double magnitude_response(const SosFilter& filter, double freq_hz, double sample_rate_hz);

/// 1 / sqrt(1 + ratio^(2 order)), ratio = omega / omega_c.
double analog_butterworth_magnitude(int order, double ratio);

/// Analog frequency (rad/s) that the bilinear transform maps to freq_hz.
double prewarp(double freq_hz, double sample_rate_hz);

/// Single causal pass with zero initial state.
std::vector<double> sos_filter(const SosFilter& filter, std::span<const double> x);

/// Zero-phase forward-backward pass with odd-reflection padding and
/// steady-state initial conditions; constants pass through unchanged.
std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x);

/// Designs the filter and applies filtfilt. Needs at least 3 * order samples.
std::vector<double> lowpass_filter(std::span<const double> series, const FilterSpec& spec);

/// Row-wise lowpass of a [channels x time] matrix. Rows are independent and
/// filtered in parallel; every row equals lowpass_filter on that row.
RealMatrix lowpass_filter_rows(const RealMatrix& rows, const FilterSpec& spec);

}  // namespace thruwall::dsp
