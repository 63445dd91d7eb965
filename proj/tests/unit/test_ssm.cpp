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

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <doctest.h>

#include "thruwall/common/error.hpp"
#include "thruwall/kernels/dense.hpp"
#include "thruwall/kernels/scan.hpp"
#include "thruwall/ssm/discretize.hpp"
#include "thruwall/ssm/scan.hpp"

using namespace thruwall;
using namespace thruwall::ssm;

namespace {

std::vector<double> normals(std::mt19937_64& rng, std::size_t n, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Random stable dense system: A = -(Q Q^T / N + 0.2 I) + small skew part.
ContinuousSsm random_stable(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  Eigen::MatrixXd q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) = d(rng);
  Eigen::MatrixXd a = -(q * q.transpose() / double(n) + 0.2 * Eigen::MatrixXd::Identity(n, n));
  a += 0.3 * (q - q.transpose()) / std::sqrt(double(n));
  ContinuousSsm s;
  s.A = RealMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s.A(i, j) = a(i, j);
  s.B = normals(rng, n);
  s.C = normals(rng, n);
  s.delta = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
  return s;
}

SelectiveParams random_selective(std::mt19937_64& rng, std::size_t L, std::size_t N) {
  SelectiveParams p;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 0; n < N; ++n) p.a_diag.push_back(-(0.1 + 3.0 * u(rng)));
  for (std::size_t k = 0; k < L; ++k) p.delta.push_back(positive_step(2.0 * u(rng) - 2.5));
  p.B = RealMatrix(L, N);
  p.C = RealMatrix(L, N);
  for (auto& v : p.B.data()) v = normals(rng, 1)[0];
  for (auto& v : p.C.data()) v = normals(rng, 1)[0];
  return p;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("linear recurrence: tree scan equals the serial reference") {
  std::mt19937_64 rng(1);
  for (std::size_t L : {1, 2, 3, 63, 64, 65, 100, 1000, 1024, 1500}) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(L), b(L), h1(L), h2(L);
    for (std::size_t i = 0; i < L; ++i) a[i] = u(rng), b[i] = u(rng);
    kernels::linear_recurrence_serial(a, b, h1);
    kernels::linear_recurrence_blelloch(a, b, h2, 4);
    CHECK(max_rel_diff(h2, h1) < 1e-12);
  }
}

TEST_CASE("unit decay turns the scan into a prefix sum") {
  const std::size_t L = 300;
  std::vector<double> a(L, 1.0), b(L), h(L);
  for (std::size_t i = 0; i < L; ++i) b[i] = static_cast<double>(i % 7);
  kernels::linear_recurrence(kernels::ScanMode::parallel, a, b, h, 8);
  double s = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    s += b[i];
    CHECK(h[i] == s);
  }
}

TEST_CASE("reverse recurrence matches a direct backward loop") {
  std::mt19937_64 rng(2);
  for (std::size_t L : {1, 5, 64, 257}) {
    const auto a = normals(rng, L, 0.5), c = normals(rng, L);
    std::vector<double> want(L), g1(L), g2(L);
    double acc = 0.0;
    for (std::size_t k = L; k-- > 0;) {
      acc = (k + 1 < L ? a[k + 1] * acc : 0.0) + c[k];
      want[k] = acc;
    }
    kernels::reverse_linear_recurrence(kernels::ScanMode::sequential, a, c, g1);
    kernels::reverse_linear_recurrence(kernels::ScanMode::parallel, a, c, g2, 4);
    CHECK(max_rel_diff(g1, want) < 1e-14);
    CHECK(max_rel_diff(g2, want) < 1e-12);
  }
}

TEST_CASE("dense kernels: parallel equals serial bit for bit, and a naive product") {
  std::mt19937_64 rng(3);
  const std::size_t R = 300, I = 40, O = 33;
  const auto x = normals(rng, R * I), w = normals(rng, I * O), b = normals(rng, O), gy = normals(rng, R * O);
  std::vector<double> y1(R * O), y2(R * O);
  kernels::affine_forward_serial(R, I, O, x, w, b, y1);
  kernels::affine_forward(R, I, O, x, w, b, y2);
  CHECK(y1 == y2);
  for (std::size_t r = 0; r < R; r += 37)
    for (std::size_t o = 0; o < O; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < I; ++i) acc += x[r * I + i] * w[i * O + o];
      CHECK(y1[r * O + o] == doctest::Approx(acc).epsilon(1e-12));
    }
  std::vector<double> gw1(I * O), gw2(I * O), gx(R * I), gb(O);
  kernels::affine_grad_weight_serial(R, I, O, x, gy, gw1);
  kernels::affine_grad_weight(R, I, O, x, gy, gw2);
  CHECK(gw1 == gw2);
  kernels::affine_grad_input(R, I, O, gy, w, gx);
  for (std::size_t r = 0; r < R; r += 41)
    for (std::size_t i = 0; i < I; ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < O; ++o) acc += gy[r * O + o] * w[i * O + o];
      CHECK(gx[r * I + i] == doctest::Approx(acc).epsilon(1e-12));
    }
  kernels::affine_grad_bias(R, O, gy, gb);
  double col0 = 0.0;
  for (std::size_t r = 0; r < R; ++r) col0 += gy[r * O];
  CHECK(gb[0] == doctest::Approx(col0));
}

TEST_CASE("expm1_over_x and its derivative") {
  CHECK(expm1_over_x(0.0) == 1.0);
  for (double x : {-20.0, -3.0, -0.5, -1e-3, -1e-6, 1e-7, 1e-4, 0.3, 2.0}) {
    CHECK(expm1_over_x(x) == doctest::Approx(std::expm1(x) / x).epsilon(1e-12));
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    const double fd = (expm1_over_x(x + h) - expm1_over_x(x - h)) / (2 * h);
    CHECK(expm1_over_x_derivative(x) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(expm1_over_x_derivative(0.0) == doctest::Approx(0.5));
}

TEST_CASE("ZOH examples") {
  ContinuousSsm zero;
  zero.A = RealMatrix(1, 1, 0.0);
  zero.B = {2.5};
  zero.C = {1.0};
  zero.delta = 0.3;
  auto d = zoh_discretize(zero);
  CHECK(d.A_bar(0, 0) == doctest::Approx(1.0));
  CHECK(d.B_bar[0] == doctest::Approx(0.75));

  ContinuousSsm half;
  half.A = RealMatrix(1, 1, -1.0);
  half.B = {1.0};
  half.C = {1.0};
  half.delta = std::log(2.0);
  d = zoh_discretize(half);
  CHECK(d.A_bar(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d.B_bar[0] == doctest::Approx(0.5).epsilon(1e-14));

  ContinuousSsm bad = half;
  bad.delta = 0.0;
  CHECK_THROWS_AS(zoh_discretize(bad), Error);
}

TEST_CASE("ZOH matches the dense matrix-exponential oracle") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const auto s = random_stable(rng, n);
    const auto d = zoh_discretize(s);
    Eigen::MatrixXd da(n, n);
    Eigen::VectorXd db(n);
    for (std::size_t i = 0; i < n; ++i) {
      db(i) = s.delta * s.B[i];
      for (std::size_t j = 0; j < n; ++j) da(i, j) = s.delta * s.A(i, j);
    }
    const Eigen::MatrixXd e = da.exp();
    const Eigen::VectorXd bbar = da.partialPivLu().solve((e - Eigen::MatrixXd::Identity(n, n)) * db);
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff = std::max(diff, std::abs(d.B_bar[i] - bbar(i)));
      for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(d.A_bar(i, j) - e(i, j)));
    }
    CHECK(diff < 1e-10);
    const auto m = matrix_exp(s.A);
    const Eigen::MatrixXd ea = (da / s.delta).exp();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(m(i, j) - ea(i, j)) < 1e-10);
  }
}

TEST_CASE("diagonal closed form agrees with the dense path") {
  ContinuousSsm s;
  s.A = RealMatrix(3, 3);
  s.A(0, 0) = -1.0;
  s.A(1, 1) = -0.01;
  s.A(2, 2) = -7.0;
  s.B = {1.0, -2.0, 0.5};
  s.C = {1.0, 1.0, 1.0};
  s.delta = 0.2;
  const auto d = zoh_discretize(s);
  for (std::size_t i = 0; i < 3; ++i) {
    const double z = s.delta * s.A(i, i);
    CHECK(d.A_bar(i, i) == doctest::Approx(std::exp(z)).epsilon(1e-14));
    CHECK(d.B_bar[i] == doctest::Approx(std::expm1(z) / z * s.delta * s.B[i]).epsilon(1e-13));
  }
}

TEST_CASE("LTI recurrence examples") {
  DiscreteSsm memoryless{RealMatrix(2, 2, 0.0), {0.5, 2.0}, {3.0, -1.0}};
  const std::vector<double> x{1.0, -2.0, 4.0};
  const auto y = recurrent_scan(memoryless, x);
  for (std::size_t k = 0; k < 3; ++k) CHECK(y[k] == doctest::Approx((1.5 - 2.0) * x[k]));
  const auto k0 = conv_kernel(memoryless, 4);
  CHECK(k0 == std::vector<double>{-0.5, 0.0, 0.0, 0.0});

  DiscreteSsm geo{RealMatrix(1, 1, 0.5), {1.0}, {1.0}};
  const auto k = conv_kernel(geo, 4);
  CHECK(k == std::vector<double>{1.0, 0.5, 0.25, 0.125});

  std::mt19937_64 rng(5);
  const auto s = zoh_discretize(random_stable(rng, 4));
  std::vector<double> impulse(20, 0.0);
  impulse[0] = 1.0;
  const auto resp = recurrent_scan(s, impulse);
  const auto kern = conv_kernel(s, 20);
  for (std::size_t i = 0; i < 20; ++i) CHECK(resp[i] == doctest::Approx(kern[i]).epsilon(1e-12));
}

TEST_CASE("recurrent scan equals kernel convolution") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const std::size_t L = 1 + (trial * 37) % 128;
    const auto s = zoh_discretize(random_stable(rng, n));
    const auto x = normals(rng, L);
    const auto y1 = recurrent_scan(s, x);
    const auto y2 = causal_convolve(conv_kernel(s, L), x);
    for (std::size_t i = 0; i < L; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-8);
  }
}

TEST_CASE("stable kernels decay geometrically") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    ContinuousSsm c = random_stable(rng, 1 + trial % 6);
    c.delta = 0.5;
    const auto d = zoh_discretize(c);
    Eigen::MatrixXd ab(d.A_bar.rows(), d.A_bar.cols());
    for (std::size_t i = 0; i < d.A_bar.rows(); ++i)
      for (std::size_t j = 0; j < d.A_bar.cols(); ++j) ab(i, j) = d.A_bar(i, j);
    const double rho = ab.eigenvalues().cwiseAbs().maxCoeff();
    REQUIRE(rho < 1.0);
    const double rate = 0.5 * (1.0 + rho);
    const auto k = conv_kernel(d, 200);
    // Bound constant from the first 50 taps, checked on the rest.
    double c0 = 0.0;
    for (std::size_t i = 0; i < 50; ++i) c0 = std::max(c0, std::abs(k[i]) / std::pow(rate, i));
    for (std::size_t i = 50; i < 200; ++i) CHECK(std::abs(k[i]) <= 1.0001 * c0 * std::pow(rate, i) + 1e-300);
  }
}

TEST_CASE("selective scan: naive oracle") {
  std::mt19937_64 rng(8);
  const std::size_t L = 32, N = 4;
  const auto p = random_selective(rng, L, N);
  const auto x = normals(rng, L);
  std::vector<double> h(N, 0.0), want(L);
  for (std::size_t k = 0; k < L; ++k) {
    double y = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const double z = p.delta[k] * p.a_diag[n];
      h[n] = std::exp(z) * h[n] + std::expm1(z) / p.a_diag[n] * p.B(k, n) * x[k];
      y += p.C(k, n) * h[n];
    }
    want[k] = y;
  }
  CHECK(max_rel_diff(selective_scan_sequential(p, x), want) < 1e-12);
  CHECK(max_rel_diff(selective_scan_parallel(p, x, 4), want) < 1e-10);
}

TEST_CASE("selective scan reduces to the LTI case with constant parameters") {
  const std::size_t L = 40, N = 3;
  SelectiveParams p;
  p.a_diag = {-0.5, -1.0, -2.0};
  p.delta.assign(L, 0.1);
  p.B = RealMatrix(L, N);
  p.C = RealMatrix(L, N);
  const double b[3] = {1.0, 0.5, -0.3}, c[3] = {0.2, -1.0, 2.0};
  for (std::size_t k = 0; k < L; ++k)
    for (std::size_t n = 0; n < N; ++n) p.B(k, n) = b[n], p.C(k, n) = c[n];
  ContinuousSsm lti;
  lti.A = RealMatrix(N, N);
  for (std::size_t n = 0; n < N; ++n) lti.A(n, n) = p.a_diag[n];
  lti.B = {b[0], b[1], b[2]};
  lti.C = {c[0], c[1], c[2]};
  lti.delta = 0.1;
  std::mt19937_64 rng(9);
  const auto x = normals(rng, L);
  const auto want = recurrent_scan(zoh_discretize(lti), x);
  CHECK(max_rel_diff(selective_scan_sequential(p, x), want) < 1e-12);
}

TEST_CASE("selective scan with one step") {
  std::mt19937_64 rng(10);
  const auto p = random_selective(rng, 1, 5);
  const std::vector<double> x{1.7};
  double want = 0.0;
  for (std::size_t n = 0; n < 5; ++n)
    want += p.C(0, n) * std::expm1(p.delta[0] * p.a_diag[n]) / p.a_diag[n] * p.B(0, n) * 1.7;
  CHECK(selective_scan_sequential(p, x)[0] == doctest::Approx(want).epsilon(1e-13));
  CHECK(selective_scan_parallel(p, x) == selective_scan_sequential(p, x));
}

TEST_CASE("parallel selective scan equals sequential at length 1024") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_selective(rng, 1024, 8);
    const auto x = normals(rng, 1024);
    CHECK(max_rel_diff(selective_scan_parallel(p, x), selective_scan_sequential(p, x)) < 1e-6);
  }
}

TEST_CASE("step positivity map") {
  CHECK(positive_step(-50.0) >= kDeltaFloor);
  CHECK(positive_step(0.0) == doctest::Approx(std::log(2.0) + kDeltaFloor));
  CHECK(positive_step(30.0) == doctest::Approx(30.0 + kDeltaFloor));
  SelectiveParams p;
  p.a_diag = {-1.0};
  p.delta = {0.0};
  p.B = RealMatrix(1, 1, 1.0);
  p.C = RealMatrix(1, 1, 1.0);
  const std::vector<double> x{1.0};
  CHECK_THROWS_AS(selective_scan_sequential(p, x), Error);
}
