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

// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "thruwall/dsp/butterworth.hpp"
#include "thruwall/kernels/dense.hpp"
#include "thruwall/kernels/scan.hpp"
#include "thruwall/model/himamba.hpp"
#include "thruwall/ris/optimizer.hpp"
#include "thruwall/ssm/scan.hpp"

using namespace thruwall;

namespace {

std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_RecurrenceSerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto a = uniform(n, 1, 0.5, 1.0), b = uniform(n, 2);
  std::vector<double> h(n);
  for (auto _ : st) {
    kernels::linear_recurrence_serial(a, b, h);
    benchmark::DoNotOptimize(h.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}

void BM_RecurrenceTree(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto a = uniform(n, 1, 0.5, 1.0), b = uniform(n, 2);
  std::vector<double> h(n);
  for (auto _ : st) {
    kernels::linear_recurrence_blelloch(a, b, h);
    benchmark::DoNotOptimize(h.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}

void BM_AffineSerial(benchmark::State& st) {
  const std::size_t R = static_cast<std::size_t>(st.range(0)), I = 64, O = 64;
  const auto x = uniform(R * I, 3), w = uniform(I * O, 4), b = uniform(O, 5);
  std::vector<double> y(R * O);
  for (auto _ : st) {
    kernels::affine_forward_serial(R, I, O, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_AffineParallel(benchmark::State& st) {
  const std::size_t R = static_cast<std::size_t>(st.range(0)), I = 64, O = 64;
  const auto x = uniform(R * I, 3), w = uniform(I * O, 4), b = uniform(O, 5);
  std::vector<double> y(R * O);
  for (auto _ : st) {
    kernels::affine_forward(R, I, O, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
}

ssm::SelectiveParams selective(std::size_t L, std::size_t N) {
  ssm::SelectiveParams p;
  p.a_diag = uniform(N, 6, -3.0, -0.1);
  p.delta = uniform(L, 7, 0.01, 0.2);
  p.B = RealMatrix(L, N);
  p.C = RealMatrix(L, N);
  p.B.data() = uniform(L * N, 8);
  p.C.data() = uniform(L * N, 9);
  return p;
}

void BM_SelectiveSequential(benchmark::State& st) {
  const auto L = static_cast<std::size_t>(st.range(0));
  const auto p = selective(L, 8);
  const auto x = uniform(L, 10);
  for (auto _ : st) benchmark::DoNotOptimize(ssm::selective_scan_sequential(p, x));
}

void BM_SelectiveParallel(benchmark::State& st) {
  const auto L = static_cast<std::size_t>(st.range(0));
  const auto p = selective(L, 8);
  const auto x = uniform(L, 10);
  for (auto _ : st) benchmark::DoNotOptimize(ssm::selective_scan_parallel(p, x));
}

// One training step's forward and backward on a batch of 32 default-sized inputs.
void BM_ModelStep(benchmark::State& st) {
  model::ModelConfig c;
  c.scan_mode = st.range(0) == 0 ? kernels::ScanMode::sequential : kernels::ScanMode::parallel;
  model::HiMamba net(c, 1);
  const std::size_t B = 32;
  const auto x = uniform(B * c.input_len * c.input_channels, 11);
  std::vector<int> labels(B);
  for (std::size_t i = 0; i < B; ++i) labels[i] = static_cast<int>(i % c.num_classes);
  for (auto _ : st) {
    model::Session s(net, true);
    auto loss = ad::cross_entropy(net.forward(s, s.input(x, B)).logits, labels);
    s.tape().backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
  st.SetLabel(model::to_string(c.scan_mode));
}

void BM_Greedy16x16(benchmark::State& st) {
  std::mt19937_64 rng(12);
  const auto chan = ris::random_cascade(256, rng);
  for (auto _ : st) benchmark::DoNotOptimize(ris::greedy_optimize({16, 16}, chan));
}

void BM_FilterRows(benchmark::State& st) {
  RealMatrix rows(64, 150);
  rows.data() = uniform(64 * 150, 13);
  const dsp::FilterSpec spec;
  for (auto _ : st) benchmark::DoNotOptimize(dsp::lowpass_filter_rows(rows, spec));
}

}  // namespace

BENCHMARK(BM_RecurrenceSerial)->RangeMultiplier(8)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_RecurrenceTree)->RangeMultiplier(8)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_AffineSerial)->Arg(150)->Arg(4800);
BENCHMARK(BM_AffineParallel)->Arg(150)->Arg(4800);
BENCHMARK(BM_SelectiveSequential)->Arg(150)->Arg(1024)->Arg(16384);
BENCHMARK(BM_SelectiveParallel)->Arg(150)->Arg(1024)->Arg(16384);
BENCHMARK(BM_ModelStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Greedy16x16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FilterRows)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
