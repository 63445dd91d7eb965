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
#include <cstdint>
#include <vector>

#include "thruwall/common/matrix.hpp"

namespace thruwall::ris {

/// One of the two transmission phase states of a 1-bit element, stored as
/// a multiple of pi/2.
enum class PhaseState : std::int8_t { minus_half_pi = -1, plus_half_pi = 1 };

constexpr PhaseState toggled(PhaseState s) noexcept {
  return s == PhaseState::minus_half_pi ? PhaseState::plus_half_pi : PhaseState::minus_half_pi;
}

struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t elements() const noexcept { return rows * cols; }
  bool operator==(const GridShape&) const = default;
};

/// M x N configuration of a 1-bit transmissive surface. Entries can only
/// ever hold the two quantized states; every mutation is a toggle.
class PhaseMatrix {
 public:
  PhaseMatrix() = default;
  PhaseMatrix(GridShape shape, PhaseState fill);

  static PhaseMatrix uniform(GridShape shape, PhaseState fill) { return {shape, fill}; }

  GridShape shape() const noexcept { return shape_; }
  std::size_t rows() const noexcept { return shape_.rows; }
  std::size_t cols() const noexcept { return shape_.cols; }
  std::size_t elements() const noexcept { return states_.size(); }

  PhaseState state(std::size_t r, std::size_t c) const { return states_[r * shape_.cols + c]; }
  /// Row-major flattened access, matching diag(exp(j * vec(Phi))).
  PhaseState state(std::size_t flat) const { return states_[flat]; }

  double phase(std::size_t r, std::size_t c) const;
  double phase(std::size_t flat) const;
  /// exp(j * phase): exactly +j or -j.
  Complex coefficient(std::size_t flat) const;

  void toggle(std::size_t r, std::size_t c);
  void toggle(std::size_t flat);
  void toggle_row(std::size_t r);
  void toggle_col(std::size_t c);
  void toggle_all();

  /// States as {-1, +1} multiples of pi/2, row-major.
  std::vector<int> multipliers() const;
  static PhaseMatrix from_multipliers(GridShape shape, const std::vector<int>& values);

  bool operator==(const PhaseMatrix&) const = default;

 private:
  GridShape shape_;
  std::vector<PhaseState> states_;
};

}  // namespace thruwall::ris
