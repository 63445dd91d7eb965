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

#include "thruwall/ssm/discretize.hpp"

#include <algorithm>
#include <cmath>

#include "thruwall/common/error.hpp"

namespace thruwall::ssm {

void ContinuousSsm::validate() const {
  const std::size_t n = B.size();
  require(n >= 1, ErrorKind::dimension, "state size must be >= 1");
  require(A.rows() == n && A.cols() == n && C.size() == n, ErrorKind::dimension,
          "A, B and C disagree on the state size");
  require(delta > 0.0 && std::isfinite(delta), ErrorKind::invalid_argument, "delta must be > 0");
  for (double v : A.data()) require(std::isfinite(v), ErrorKind::invalid_argument, "A must be finite");
  for (double v : B) require(std::isfinite(v), ErrorKind::invalid_argument, "B must be finite");
  for (double v : C) require(std::isfinite(v), ErrorKind::invalid_argument, "C must be finite");
}

double expm1_over_x(double x) {
  if (std::abs(x) < 1e-5) return 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0;
  return std::expm1(x) / x;
}

double expm1_over_x_derivative(double x) {
  if (std::abs(x) < 1e-3) {
    return 0.5 + x / 3.0 + x * x / 8.0 + x * x * x / 30.0 + x * x * x * x / 144.0;
  }
  return (x * std::exp(x) - std::expm1(x)) / (x * x);
}

namespace {

RealMatrix multiply(const RealMatrix& a, const RealMatrix& b) {
  const std::size_t n = a.rows(), m = b.cols(), k = a.cols();
  RealMatrix c(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      for (std::size_t j = 0; j < m; ++j) c(i, j) += av * b(p, j);
    }
  return c;
}

double inf_norm(const RealMatrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

bool is_diagonal(const RealMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

}  // namespace

RealMatrix matrix_exp(const RealMatrix& m) {
  require(m.rows() == m.cols(), ErrorKind::dimension, "matrix exponential needs a square matrix");
  const std::size_t n = m.rows();
  const double norm = inf_norm(m);
  require(std::isfinite(norm), ErrorKind::overflow, "matrix exponential of a non-finite matrix");

  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const double scale = std::ldexp(1.0, -squarings);

  RealMatrix scaled = m;
  for (double& v : scaled.data()) v *= scale;

  // Taylor series to 20 terms; with ||X|| <= 0.5 the tail is below 1e-25.
  RealMatrix result(n, n);
  RealMatrix term(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    result(i, i) = 1.0;
    term(i, i) = 1.0;
  }
  for (int k = 1; k <= 20; ++k) {
    term = multiply(term, scaled);
    for (double& v : term.data()) v /= k;
    for (std::size_t i = 0; i < result.size(); ++i) result.data()[i] += term.data()[i];
  }
  for (int s = 0; s < squarings; ++s) result = multiply(result, result);

  for (double v : result.data()) {
    require(std::isfinite(v), ErrorKind::overflow, "matrix exponential overflowed");
  }
  return result;
}

DiscreteSsm zoh_discretize(const ContinuousSsm& ssm) {
  ssm.validate();
  const std::size_t n = ssm.state_size();
  const double d = ssm.delta;
  DiscreteSsm out;
  out.C = ssm.C;
  out.B_bar.assign(n, 0.0);
  out.A_bar = RealMatrix(n, n);

  if (is_diagonal(ssm.A)) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = d * ssm.A(i, i);
      const double e = std::exp(x);
      require(std::isfinite(e), ErrorKind::overflow, "exp(delta * A) overflowed");
      out.A_bar(i, i) = e;
      out.B_bar[i] = d * expm1_over_x(x) * ssm.B[i];
    }
    return out;
  }

  RealMatrix aug(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = d * ssm.A(i, j);
    aug(i, n) = d * ssm.B[i];
  }
  const RealMatrix e = matrix_exp(aug);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.A_bar(i, j) = e(i, j);
    out.B_bar[i] = e(i, n);
  }
  return out;
}

}  // namespace thruwall::ssm
