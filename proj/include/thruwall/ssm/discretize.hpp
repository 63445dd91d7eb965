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

#include <vector>

#include "thruwall/common/matrix.hpp"

namespace thruwall::ssm {

/// h'(t) = A h(t) + B x(t), y(t) = C h(t), sampled with step delta.
struct ContinuousSsm {
  RealMatrix A;           // N x N
  std::vector<double> B;  // N
  std::vector<double> C;  // N
  double delta = 1.0;

  std::size_t state_size() const noexcept { return B.size(); }
  void validate() const;
};

/// h_k = A_bar h_{k-1} + B_bar x_k, y_k = C h_k.
struct DiscreteSsm {
  RealMatrix A_bar;
  std::vector<double> B_bar;
  std::vector<double> C;

  std::size_t state_size() const noexcept { return B_bar.size(); }
};

/// (e^x - 1) / x, continuous through x = 0.
double expm1_over_x(double x);
/// d/dx of expm1_over_x.
double expm1_over_x_derivative(double x);

/// Dense matrix exponential by scaling and squaring of a Taylor series.
RealMatrix matrix_exp(const RealMatrix& m);

/// Zero-order hold: A_bar = exp(delta A),
/// B_bar = (delta A)^{-1} (exp(delta A) - I) delta B.
/// Diagonal A takes the element-wise closed form; dense A goes through the
/// exponential of the augmented matrix [[dA, dB], [0, 0]], which needs no
/// inverse and stays valid for singular A.
DiscreteSsm zoh_discretize(const ContinuousSsm& ssm);

}  // namespace thruwall::ssm
