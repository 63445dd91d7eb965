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

#include "thruwall/dsp/butterworth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "thruwall/common/error.hpp"

namespace thruwall::dsp {

namespace {
constexpr double kPi = std::numbers::pi;
}

void FilterSpec::validate() const {
  require(order >= 1, ErrorKind::design, "filter order must be positive");
  require(sample_rate_hz > 0.0, ErrorKind::design, "sample rate must be positive");
  require(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0, ErrorKind::design,
          "cutoff " + std::to_string(cutoff_hz) + " Hz must lie strictly inside (0, Nyquist)");
}

double prewarp(double freq_hz, double sample_rate_hz) {
  return 2.0 * sample_rate_hz * std::tan(kPi * freq_hz / sample_rate_hz);
}

double analog_butterworth_magnitude(int order, double ratio) {
  return 1.0 / std::sqrt(1.0 + std::pow(ratio, 2.0 * order));
}

SosFilter design_butterworth(const FilterSpec& spec) {
  spec.validate();
  const int n = spec.order;
  const double fs = spec.sample_rate_hz;
  const double wc = prewarp(spec.cutoff_hz, fs);
  const double k2 = 2.0 * fs;

  auto bilinear = [k2](Complex s) { return (k2 + s) / (k2 - s); };

  SosFilter filter;
  // Upper-half-plane poles pair with their conjugates; an odd order leaves
  // one real pole at -wc.
  for (int k = 0; k < n / 2; ++k) {
    const double theta = kPi * (2.0 * k + n + 1) / (2.0 * n);
    const Complex s = wc * Complex{std::cos(theta), std::sin(theta)};
    const Complex z = bilinear(s);
    Biquad q;
    q.a1 = -2.0 * z.real();
    q.a2 = std::norm(z);
    const double g = (1.0 + q.a1 + q.a2) / 4.0;
    q.b0 = g;
    q.b1 = 2.0 * g;
    q.b2 = g;
    filter.sections.push_back(q);
  }
  if (n % 2 == 1) {
    const double z = bilinear(Complex{-wc, 0.0}).real();
    Biquad q;
    q.a1 = -z;
    q.a2 = 0.0;
    const double g = (1.0 - z) / 2.0;
    q.b0 = g;
    q.b1 = g;
    q.b2 = 0.0;
    filter.sections.push_back(q);
  }
  return filter;
}

double magnitude_response(const SosFilter& filter, double freq_hz, double sample_rate_hz) {
  const double w = 2.0 * kPi * freq_hz / sample_rate_hz;
  const Complex z1 = std::polar(1.0, -w);
  const Complex z2 = z1 * z1;
  Complex h{1.0, 0.0};
  for (const auto& q : filter.sections) {
    h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
  }
  return std::abs(h);
}

namespace {

struct SectionState {
  double z1 = 0.0, z2 = 0.0;
};

void run_sections(const SosFilter& f, std::vector<SectionState>& st, std::vector<double>& x) {
  for (std::size_t s = 0; s < f.sections.size(); ++s) {
    const auto& q = f.sections[s];
    double z1 = st[s].z1, z2 = st[s].z2;
    for (double& v : x) {
      const double in = v;
      const double out = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * out + z2;
      z2 = q.b2 * in - q.a2 * out;
      v = out;
    }
    st[s] = {z1, z2};
  }
}

/// Per-section state for a step input of height `level` held forever.
std::vector<SectionState> steady_state(const SosFilter& f, double level) {
  std::vector<SectionState> st(f.sections.size());
  double in = level;
  for (std::size_t s = 0; s < f.sections.size(); ++s) {
    const auto& q = f.sections[s];
    const double out = in * (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    st[s].z2 = q.b2 * in - q.a2 * out;
    st[s].z1 = q.b1 * in - q.a1 * out + st[s].z2;
    in = out;
  }
  return st;
}

}  // namespace

std::vector<double> sos_filter(const SosFilter& filter, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  std::vector<SectionState> st(filter.sections.size());
  run_sections(filter, st, y);
  return y;
}

std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x) {
  const std::size_t n = x.size();
  require(n >= 2, ErrorKind::length, "filtfilt needs at least two samples");
  const std::size_t pad = std::min<std::size_t>(3 * (2 * filter.sections.size() + 1), n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  auto st = steady_state(filter, ext.front());
  run_sections(filter, st, ext);
  std::reverse(ext.begin(), ext.end());
  st = steady_state(filter, ext.front());
  run_sections(filter, st, ext);
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<double> lowpass_filter(std::span<const double> series, const FilterSpec& spec) {
  const SosFilter f = design_butterworth(spec);
  require(series.size() >= static_cast<std::size_t>(3 * spec.order), ErrorKind::length,
          "series of length " + std::to_string(series.size()) + " is shorter than 3x the order");
  return filtfilt(f, series);
}

RealMatrix lowpass_filter_rows(const RealMatrix& rows, const FilterSpec& spec) {
  const SosFilter f = design_butterworth(spec);
  require(rows.cols() >= static_cast<std::size_t>(3 * spec.order), ErrorKind::length,
          "rows are shorter than 3x the filter order");
  RealMatrix out(rows.rows(), rows.cols());
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto y = filtfilt(f, rows.row(r));
    std::copy(y.begin(), y.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace thruwall::dsp
