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

#include "thruwall/ssm/scan.hpp"

#include <algorithm>
#include <cmath>

#include "thruwall/common/error.hpp"

namespace thruwall::ssm {

std::vector<double> recurrent_scan(const DiscreteSsm& ssm, std::span<const double> x) {
  const std::size_t n = ssm.state_size();
  require(ssm.A_bar.rows() == n && ssm.A_bar.cols() == n && ssm.C.size() == n,
          ErrorKind::dimension, "discrete system has inconsistent shapes");
  std::vector<double> h(n, 0.0), next(n);
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = ssm.B_bar[i] * x[k];
      for (std::size_t j = 0; j < n; ++j) acc += ssm.A_bar(i, j) * h[j];
      next[i] = acc;
    }
    h.swap(next);
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) out += ssm.C[i] * h[i];
    y[k] = out;
  }
  return y;
}

std::vector<double> conv_kernel(const DiscreteSsm& ssm, std::size_t length) {
  require(length >= 1, ErrorKind::invalid_argument, "kernel length must be >= 1");
  const std::size_t n = ssm.state_size();
  std::vector<double> v = ssm.B_bar, next(n);
  std::vector<double> k(length);
  for (std::size_t step = 0; step < length; ++step) {
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) out += ssm.C[i] * v[i];
    k[step] = out;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += ssm.A_bar(i, j) * v[j];
      next[i] = acc;
    }
    v.swap(next);
  }
  return k;
}

std::vector<double> causal_convolve(std::span<const double> kernel, std::span<const double> x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    double acc = 0.0;
    const std::size_t taps = std::min(k + 1, kernel.size());
    for (std::size_t j = 0; j < taps; ++j) acc += kernel[j] * x[k - j];
    y[k] = acc;
  }
  return y;
}

void SelectiveParams::validate(std::size_t input_length) const {
  const std::size_t L = delta.size(), N = a_diag.size();
  require(N >= 1, ErrorKind::dimension, "state size must be >= 1");
  require(L == input_length, ErrorKind::dimension, "delta length differs from the input length");
  require(B.rows() == L && B.cols() == N && C.rows() == L && C.cols() == N, ErrorKind::dimension,
          "per-step B and C must be L x N");
  for (double d : delta) require(d > 0.0, ErrorKind::invalid_argument, "step sizes must be > 0");
}

double positive_step(double raw, double floor) {
  // log1p(exp(x)) without overflow for large x.
  const double sp = raw > 30.0 ? raw : std::log1p(std::exp(raw));
  return sp + floor;
}

std::vector<double> selective_scan(kernels::ScanMode mode, const SelectiveParams& params,
                                   std::span<const double> x, std::size_t serial_threshold) {
  params.validate(x.size());
  const std::size_t L = x.size(), N = params.state_size();
  std::vector<double> a(L), b(L), h(L);
  std::vector<double> y(L, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    const double an = params.a_diag[n];
    for (std::size_t k = 0; k < L; ++k) {
      const double z = params.delta[k] * an;
      a[k] = std::exp(z);
      b[k] = params.delta[k] * expm1_over_x(z) * params.B(k, n) * x[k];
    }
    kernels::linear_recurrence(mode, a, b, h, serial_threshold);
    for (std::size_t k = 0; k < L; ++k) y[k] += params.C(k, n) * h[k];
  }
  return y;
}

std::vector<double> selective_scan_sequential(const SelectiveParams& params,
                                              std::span<const double> x) {
  return selective_scan(kernels::ScanMode::sequential, params, x);
}

std::vector<double> selective_scan_parallel(const SelectiveParams& params,
                                            std::span<const double> x,
                                            std::size_t serial_threshold) {
  return selective_scan(kernels::ScanMode::parallel, params, x, serial_threshold);
}

}  // namespace thruwall::ssm
