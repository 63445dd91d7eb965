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

// Row-major affine map y[R x out] = x[R x in] * W[in x out] (+ bias[out]).
// The *_serial variants are the reference; the others split independent
// outputs across OpenMP threads with the same per-element summation order,
// so both produce bit-identical results.

void affine_forward_serial(std::size_t rows, std::size_t in, std::size_t out,
                           std::span<const double> x, std::span<const double> w,
                           std::span<const double> bias, std::span<double> y);
void affine_forward(std::size_t rows, std::size_t in, std::size_t out, std::span<const double> x,
                    std::span<const double> w, std::span<const double> bias, std::span<double> y);

/// gx += gy * W^T
void affine_grad_input(std::size_t rows, std::size_t in, std::size_t out,
                       std::span<const double> gy, std::span<const double> w, std::span<double> gx);
/// gw += x^T * gy
void affine_grad_weight(std::size_t rows, std::size_t in, std::size_t out,
                        std::span<const double> x, std::span<const double> gy, std::span<double> gw);
void affine_grad_weight_serial(std::size_t rows, std::size_t in, std::size_t out,
                               std::span<const double> x, std::span<const double> gy,
                               std::span<double> gw);
/// gb += column sums of gy
void affine_grad_bias(std::size_t rows, std::size_t out, std::span<const double> gy,
                      std::span<double> gb);

}  // namespace thruwall::kernels
