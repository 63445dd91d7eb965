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

#include "thruwall/kernels/dense.hpp"

#include <vector>

namespace thruwall::kernels {

namespace {

inline void affine_row(std::size_t in, std::size_t out, const double* xr, const double* w,
                       std::span<const double> bias, double* yr) {
  if (bias.empty()) {
    for (std::size_t o = 0; o < out; ++o) yr[o] = 0.0;
  } else {
    for (std::size_t o = 0; o < out; ++o) yr[o] = bias[o];
  }
  for (std::size_t i = 0; i < in; ++i) {
    const double xv = xr[i];
    const double* wr = w + i * out;
    for (std::size_t o = 0; o < out; ++o) yr[o] += xv * wr[o];
  }
}

}  // namespace

void affine_forward_serial(std::size_t rows, std::size_t in, std::size_t out,
                           std::span<const double> x, std::span<const double> w,
                           std::span<const double> bias, std::span<double> y) {
  for (std::size_t r = 0; r < rows; ++r) {
    affine_row(in, out, x.data() + r * in, w.data(), bias, y.data() + r * out);
  }
}

void affine_forward(std::size_t rows, std::size_t in, std::size_t out, std::span<const double> x,
                    std::span<const double> w, std::span<const double> bias, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (rows * in * out > 32768)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const auto ru = static_cast<std::size_t>(r);
    affine_row(in, out, x.data() + ru * in, w.data(), bias, y.data() + ru * out);
  }
}

void affine_grad_input(std::size_t rows, std::size_t in, std::size_t out,
                       std::span<const double> gy, std::span<const double> w, std::span<double> gx) {
  // With W^T laid out row-major the inner loop is an axpy over `in`, which
  // vectorises without reassociating a reduction.
  std::vector<double> wt(in * out);
  for (std::size_t i = 0; i < in; ++i)
    for (std::size_t o = 0; o < out; ++o) wt[o * in + i] = w[i * out + o];
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (rows * in * out > 32768)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const auto ru = static_cast<std::size_t>(r);
    const double* g = gy.data() + ru * out;
    double* dx = gx.data() + ru * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double go = g[o];
      const double* wr = wt.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) dx[i] += go * wr[i];
    }
  }
}

void affine_grad_weight_serial(std::size_t rows, std::size_t in, std::size_t out,
                               std::span<const double> x, std::span<const double> gy,
                               std::span<double> gw) {
  for (std::size_t i = 0; i < in; ++i) {
    double* dw = gw.data() + i * out;
    for (std::size_t r = 0; r < rows; ++r) {
      const double xv = x[r * in + i];
      const double* g = gy.data() + r * out;
      for (std::size_t o = 0; o < out; ++o) dw[o] += xv * g[o];
    }
  }
}

void affine_grad_weight(std::size_t rows, std::size_t in, std::size_t out,
                        std::span<const double> x, std::span<const double> gy, std::span<double> gw) {
  // Each thread owns whole rows of gw and sums over `rows` in order.
  const auto n = static_cast<std::ptrdiff_t>(in);
#pragma omp parallel for schedule(static) if (rows * in * out > 32768)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    double* dw = gw.data() + iu * out;
    for (std::size_t r = 0; r < rows; ++r) {
      const double xv = x[r * in + iu];
      const double* g = gy.data() + r * out;
      for (std::size_t o = 0; o < out; ++o) dw[o] += xv * g[o];
    }
  }
}

void affine_grad_bias(std::size_t rows, std::size_t out, std::span<const double> gy,
                      std::span<double> gb) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = gy.data() + r * out;
    for (std::size_t o = 0; o < out; ++o) gb[o] += g[o];
  }
}

}  // namespace thruwall::kernels
