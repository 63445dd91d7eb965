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
#include "thruwall/kernels/scan.hpp"
#include "thruwall/ssm/discretize.hpp"

namespace thruwall::ssm {

// Time-invariant system.

/// h_k = A_bar h_{k-1} + B_bar x_k from h_{-1} = 0; y_k = C h_k.
std::vector<double> recurrent_scan(const DiscreteSsm& ssm, std::span<const double> x);

/// (C B_bar, C A_bar B_bar, ..., C A_bar^{L-1} B_bar).
std::vector<double> conv_kernel(const DiscreteSsm& ssm, std::size_t length);

/// y_k = sum_{j <= k} kernel_j x_{k-j}.
std::vector<double> causal_convolve(std::span<const double> kernel, std::span<const double> x);

// Selective (input-dependent) system with a shared diagonal A.

/// Per-step parameters for one input channel.
struct SelectiveParams {
  std::vector<double> a_diag;  // N, continuous-time diagonal of A
  std::vector<double> delta;   // L, each > 0
  RealMatrix B;                // L x N
  RealMatrix C;                // L x N

  std::size_t length() const noexcept { return delta.size(); }
  std::size_t state_size() const noexcept { return a_diag.size(); }
  void validate(std::size_t input_length) const;
};

inline constexpr double kDeltaFloor = 1e-4;

/// softplus(raw) + floor, the map used to keep step sizes positive.
double positive_step(double raw, double floor = kDeltaFloor);

/// Per-step ZOH (A_bar_k = exp(delta_k A), B_bar_k = delta_k phi1(delta_k A) B_k)
/// followed by h_k = A_bar_k h_{k-1} + B_bar_k x_k, y_k = C_k h_k.
std::vector<double> selective_scan_sequential(const SelectiveParams& params,
                                              std::span<const double> x);

/// Same recurrence through the tree-structured associative scan.
std::vector<double> selective_scan_parallel(const SelectiveParams& params,
                                            std::span<const double> x,
                                            std::size_t serial_threshold = 64);

std::vector<double> selective_scan(kernels::ScanMode mode, const SelectiveParams& params,
                                   std::span<const double> x, std::size_t serial_threshold = 64);

}  // namespace thruwall::ssm
