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

#include "thruwall/kernels/scan.hpp"

#include <cassert>
#include <vector>

namespace thruwall::kernels {

namespace {

// Levels with fewer independent combines than this stay on one thread.
constexpr std::size_t kParallelLevelWidth = 2048;

struct Affine {
  double a;
  double b;
};

// Apply `first`, then `second`.
inline Affine compose(Affine first, Affine second) {
  return {second.a * first.a, second.a * first.b + second.b};
}

}  // namespace

void linear_recurrence_serial(std::span<const double> a, std::span<const double> b,
                              std::span<double> h) {
  assert(a.size() == b.size() && b.size() == h.size());
  double state = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    state = a[k] * state + b[k];
    h[k] = state;
  }
}

void linear_recurrence_blelloch(std::span<const double> a, std::span<const double> b,
                                std::span<double> h, std::size_t serial_threshold) {
  assert(a.size() == b.size() && b.size() == h.size());
  const std::size_t n = a.size();
  if (n == 0) return;
  if (n < serial_threshold) {
    linear_recurrence_serial(a, b, h);
    return;
  }

  std::size_t size = 1;
  while (size < n) size <<= 1;
  thread_local std::vector<Affine> tree;
  tree.assign(size, Affine{1.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) tree[i] = {a[i], b[i]};

  // Up-sweep: tree[right] becomes the composition of its whole subtree.
  for (std::size_t stride = 1; stride < size; stride <<= 1) {
    const std::size_t step = stride << 1;
    const auto count = static_cast<std::ptrdiff_t>(size / step);
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(count) >= kParallelLevelWidth)
    for (std::ptrdiff_t j = 0; j < count; ++j) {
      const std::size_t right = static_cast<std::size_t>(j) * step + step - 1;
      tree[right] = compose(tree[right - stride], tree[right]);
    }
  }

  // Down-sweep to the exclusive prefix; the root holds the identity.
  tree[size - 1] = {1.0, 0.0};
  for (std::size_t stride = size >> 1; stride >= 1; stride >>= 1) {
    const std::size_t step = stride << 1;
    const auto count = static_cast<std::ptrdiff_t>(size / step);
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(count) >= kParallelLevelWidth)
    for (std::ptrdiff_t j = 0; j < count; ++j) {
      const std::size_t right = static_cast<std::size_t>(j) * step + step - 1;
      const std::size_t left = right - stride;
      const Affine left_sum = tree[left];
      tree[left] = tree[right];
      tree[right] = compose(tree[right], left_sum);
    }
    if (stride == 1) break;
  }

  // Inclusive value = exclusive prefix followed by the element itself.
  for (std::size_t i = 0; i < n; ++i) h[i] = compose(tree[i], Affine{a[i], b[i]}).b;
}

void linear_recurrence(ScanMode mode, std::span<const double> a, std::span<const double> b,
                       std::span<double> h, std::size_t serial_threshold) {
  if (mode == ScanMode::sequential) linear_recurrence_serial(a, b, h);
  else linear_recurrence_blelloch(a, b, h, serial_threshold);
}

void reverse_linear_recurrence(ScanMode mode, std::span<const double> a, std::span<const double> c,
                               std::span<double> g, std::size_t serial_threshold) {
  const std::size_t n = a.size();
  assert(c.size() == n && g.size() == n);
  if (n == 0) return;
  if (mode == ScanMode::sequential) {
    double state = 0.0;
    for (std::size_t k = n; k-- > 0;) {
      state = (k + 1 < n ? a[k + 1] * state : 0.0) + c[k];
      g[k] = state;
    }
    return;
  }
  thread_local std::vector<double> ra, rc, rg;
  ra.resize(n);
  rc.resize(n);
  rg.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    ra[r] = r == 0 ? 1.0 : a[n - r];
    rc[r] = c[n - 1 - r];
  }
  linear_recurrence_blelloch(ra, rc, rg, serial_threshold);
  for (std::size_t r = 0; r < n; ++r) g[n - 1 - r] = rg[r];
}

}  // namespace thruwall::kernels
