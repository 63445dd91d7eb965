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

#include "thruwall/ris/phase_matrix.hpp"

#include <numbers>
#include <string>

#include "thruwall/common/error.hpp"

namespace thruwall::ris {

PhaseMatrix::PhaseMatrix(GridShape shape, PhaseState fill)
    : shape_(shape), states_(shape.elements(), fill) {
  require(shape.rows > 0 && shape.cols > 0, ErrorKind::dimension,
          "phase matrix needs at least one row and one column");
}

double PhaseMatrix::phase(std::size_t r, std::size_t c) const {
  return phase(r * shape_.cols + c);
}

double PhaseMatrix::phase(std::size_t flat) const {
  return static_cast<int>(states_.at(flat)) * (std::numbers::pi / 2.0);
}

Complex PhaseMatrix::coefficient(std::size_t flat) const {
  return states_.at(flat) == PhaseState::plus_half_pi ? Complex{0.0, 1.0} : Complex{0.0, -1.0};
}

void PhaseMatrix::toggle(std::size_t r, std::size_t c) { toggle(r * shape_.cols + c); }

void PhaseMatrix::toggle(std::size_t flat) { states_.at(flat) = toggled(states_.at(flat)); }

void PhaseMatrix::toggle_row(std::size_t r) {
  require(r < shape_.rows, ErrorKind::dimension, "row index out of range");
  for (std::size_t c = 0; c < shape_.cols; ++c) toggle(r, c);
}

void PhaseMatrix::toggle_col(std::size_t c) {
  require(c < shape_.cols, ErrorKind::dimension, "column index out of range");
  for (std::size_t r = 0; r < shape_.rows; ++r) toggle(r, c);
}

void PhaseMatrix::toggle_all() {
  for (auto& s : states_) s = toggled(s);
}

std::vector<int> PhaseMatrix::multipliers() const {
  std::vector<int> out;
  out.reserve(states_.size());
  for (auto s : states_) out.push_back(static_cast<int>(s));
  return out;
}

PhaseMatrix PhaseMatrix::from_multipliers(GridShape shape, const std::vector<int>& values) {
  require(values.size() == shape.elements(), ErrorKind::dimension,
          "expected " + std::to_string(shape.elements()) + " phase multipliers, got " +
              std::to_string(values.size()));
  PhaseMatrix m(shape, PhaseState::minus_half_pi);
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] == -1 || values[i] == 1, ErrorKind::format,
            "phase multipliers must be -1 or +1");
    m.states_[i] = static_cast<PhaseState>(values[i]);
  }
  return m;
}

}  // namespace thruwall::ris
