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

#include <cstddef>
#include <span>

namespace thruwall::kernels {

/// First-order linear recurrence h_k = a_k * h_{k-1} + b_k with h_{-1} = 0.
///
/// The recurrence is an inclusive prefix scan over affine maps under
///   (a1, b1) o (a2, b2) = (a2 * a1, a2 * b1 + b2),
/// which is associative, so it can be evaluated as a tree.
enum class ScanMode { sequential, parallel };

/// Reference left-to-right evaluation.
void linear_recurrence_serial(std::span<const double> a, std::span<const double> b,
                              std::span<double> h);

/// Work-efficient up-sweep/down-sweep scan over a power-of-two padded tree.
/// The reduction tree depends only on the length, so results are identical
/// for any thread count. Lengths below `serial_threshold` use the serial
/// path. Levels wide enough are split across OpenMP threads.
void linear_recurrence_blelloch(std::span<const double> a, std::span<const double> b,
                                std::span<double> h, std::size_t serial_threshold = 64);

void linear_recurrence(ScanMode mode, std::span<const double> a, std::span<const double> b,
                       std::span<double> h, std::size_t serial_threshold = 64);

/// Reverse-time recurrence g_k = a_{k+1} * g_{k+1} + c_k with g_{L} = 0, as
/// needed to back-propagate through a forward scan. `a` is the forward
/// coefficient sequence.
void reverse_linear_recurrence(ScanMode mode, std::span<const double> a, std::span<const double> c,
                               std::span<double> g, std::size_t serial_threshold = 64);

}  // namespace thruwall::kernels
