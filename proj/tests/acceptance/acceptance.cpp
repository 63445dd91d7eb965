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

// Acceptance checks. Each criterion prints one line:
//   criterion <n>: PASS|FAIL <details>
// and the process exits nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "thruwall/ad/ops.hpp"
#include "thruwall/channel/link_budget.hpp"
#include "thruwall/cli/commands.hpp"
#include "thruwall/cli/pipeline.hpp"
#include "thruwall/common/random.hpp"
#include "thruwall/dsp/butterworth.hpp"
#include "thruwall/dsp/features.hpp"
#include "thruwall/io/files.hpp"
#include "thruwall/model/himamba.hpp"
#include "thruwall/ris/optimizer.hpp"
#include "thruwall/ssm/discretize.hpp"
#include "thruwall/ssm/scan.hpp"

namespace fs = std::filesystem;
using namespace thruwall;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void progress(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

std::vector<double> normals(std::mt19937_64& rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
  std::normal_distribution<double> d(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// 1 -------------------------------------------------------------------------

Outcome wall_attenuation() {
  // Hand computation: 1636 sigma / sqrt(eps'), in dB/m.
  struct Case { double eps, sigma, quoted; };
  Outcome o{true, ""};
  for (const Case c : {Case{5.5, 0.11, 76.74}, Case{3.58, 0.11, 95.11}}) {
    const double hand = 1636.0 * c.sigma / std::sqrt(c.eps);
    const double got = channel::wall_attenuation_rate({c.eps, c.sigma, 1.0});
    const double rel = std::abs(got - hand) / hand;
    const bool ok = rel <= 1e-6 && std::abs(got - c.quoted) < 0.005;
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += fmt("eps=%.2f: ", c.eps) + fmt("%.4f dB/m", got) + fmt(" (rel %.1e)", rel);
  }
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome greedy_gain() {
  const ris::GridShape grid{16, 16};
  const ris::ChannelModelSpec spec;  // i.i.d. complex Gaussian
  const std::uint64_t seed = 2026;
  const auto report = ris::array_gain_report(100, grid, spec, seed);

  std::size_t non_monotone = 0;
  double mean = 0.0;
  for (std::size_t t = 0; t < 100; ++t) {
    const auto chan = ris::draw_channel(spec, grid.elements(), derive_seed(seed, {t}));
    const auto r = ris::greedy_optimize(grid, chan);
    for (std::size_t k = 1; k < r.trace.values.size(); ++k)
      if (r.trace.values[k] < r.trace.values[k - 1]) ++non_monotone;
    mean += 10.0 * std::log10(r.trace.values.back() / r.trace.values.front()) / 100.0;
  }

  std::mt19937_64 rng(77);
  std::size_t oracle_violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t M = 1 + rng() % 4, N = 1 + rng() % 4;
    const auto chan = ris::random_cascade(M * N, rng);
    const double g = ris::greedy_optimize({M, N}, chan).trace.values.back();
    if (g > ris::exhaustive_oracle({M, N}, chan).power * (1 + 1e-12)) ++oracle_violations;
  }
  const bool ok = report.mean_db >= 8.0 && report.mean_db <= 15.0 &&
                  std::abs(mean - report.mean_db) < 1e-9 && non_monotone == 0 &&
                  oracle_violations == 0;
  return {ok, fmt("mean gain %.2f dB over 100 16x16 trials", report.mean_db) +
                  fmt(" (band [8, 15]), non-monotone steps %.0f", double(non_monotone)) +
                  fmt(", greedy > oracle in %.0f/200", double(oracle_violations))};
}

// 3 -------------------------------------------------------------------------

ssm::ContinuousSsm random_stable(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  Eigen::MatrixXd q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) = d(rng);
  Eigen::MatrixXd a = -(q * q.transpose() / double(n) + 0.2 * Eigen::MatrixXd::Identity(n, n));
  a += 0.3 * (q - q.transpose()) / std::sqrt(double(n));
  ssm::ContinuousSsm s;
  s.A = RealMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s.A(i, j) = a(i, j);
  s.B = normals(rng, n);
  s.C = normals(rng, n);
  s.delta = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
  return s;
}

Outcome ssm_oracles() {
  std::mt19937_64 rng(3);
  double zoh_diff = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + t % 8;
    const auto s = random_stable(rng, n);
    const auto d = ssm::zoh_discretize(s);
    Eigen::MatrixXd da(n, n);
    Eigen::VectorXd db(n);
    for (std::size_t i = 0; i < n; ++i) {
      db(i) = s.delta * s.B[i];
      for (std::size_t j = 0; j < n; ++j) da(i, j) = s.delta * s.A(i, j);
    }
    const Eigen::MatrixXd e = da.exp();  // Pade scaling and squaring
    const Eigen::VectorXd bbar = da.partialPivLu().solve((e - Eigen::MatrixXd::Identity(n, n)) * db);
    for (std::size_t i = 0; i < n; ++i) {
      zoh_diff = std::max(zoh_diff, std::abs(d.B_bar[i] - bbar(i)));
      for (std::size_t j = 0; j < n; ++j) zoh_diff = std::max(zoh_diff, std::abs(d.A_bar(i, j) - e(i, j)));
    }
  }

  double conv_diff = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto s = ssm::zoh_discretize(random_stable(rng, 1 + t % 8));
    const auto x = normals(rng, 64);
    const auto y1 = ssm::recurrent_scan(s, x);
    const auto y2 = ssm::causal_convolve(ssm::conv_kernel(s, 64), x);
    for (std::size_t i = 0; i < 64; ++i) conv_diff = std::max(conv_diff, std::abs(y1[i] - y2[i]));
  }

  double scan_rel = 0.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t L = 1024, N = 8;
    ssm::SelectiveParams p;
    for (std::size_t n = 0; n < N; ++n) p.a_diag.push_back(-(0.1 + 3.0 * u(rng)));
    for (std::size_t k = 0; k < L; ++k) p.delta.push_back(ssm::positive_step(2.0 * u(rng) - 2.5));
    p.B = RealMatrix(L, N);
    p.C = RealMatrix(L, N);
    for (auto& v : p.B.data()) v = normals(rng, 1)[0];
    for (auto& v : p.C.data()) v = normals(rng, 1)[0];
    const auto x = normals(rng, L);
    const auto ys = ssm::selective_scan_sequential(p, x);
    const auto yp = ssm::selective_scan_parallel(p, x);
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < L; ++k) {
      diff = std::max(diff, std::abs(yp[k] - ys[k]));
      scale = std::max(scale, std::abs(ys[k]));
    }
    scan_rel = std::max(scan_rel, diff / scale);
  }
  const bool ok = zoh_diff < 1e-10 && conv_diff < 1e-8 && scan_rel < 1e-6;
  return {ok, fmt("(a) zoh vs expm %.2e", zoh_diff) + fmt(" (b) recurrent vs conv %.2e", conv_diff) +
                  fmt(" (c) parallel vs sequential rel %.2e", scan_rel)};
}

// 4 -------------------------------------------------------------------------

Outcome gradient_check() {
  model::ModelConfig c;
  c.input_len = 4;
  c.input_channels = 3;
  c.model_dim = 2;
  c.state_dim = 2;
  c.num_blocks = 1;
  c.num_classes = 3;
  model::HiMamba net(c, 4);
  // Move every parameter off its initial value so no gradient path is
  // trivially zero (residual scales start at 0).
  std::mt19937_64 rng(44);
  for (auto& p : net.parameters().all())
    for (auto& v : p.value) v += std::normal_distribution<double>(0.0, 0.3)(rng);

  const std::size_t B = 3;
  const auto x = normals(rng, B * c.input_len * c.input_channels);
  const std::vector<int> labels{0, 2, 1};
  net.parameters().zero_grad();
  {
    model::Session s(net, true);
    const ad::Var loss = ad::cross_entropy(net.forward(s, s.input(x, B)).logits, labels);
    if (!s.tape().backward(loss).unreached.empty()) return {false, "unreached parameters"};
  }
  auto value = [&]() {
    model::Session s(net, false);
    return ad::cross_entropy(net.forward(s, s.input(x, B)).logits, labels).item();
  };

  // Fourth-order central difference.
  const double h = 1e-3;
  double worst = 0.0;
  std::string worst_name;
  std::size_t checked = 0;
  for (auto& p : net.parameters().all()) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p.value[i];
      auto at = [&](double dx) {
        p.value[i] = orig + dx;
        return value();
      };
      const double fd = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      p.value[i] = orig;
      const double rel = std::abs(p.grad[i] - fd) / std::max({std::abs(p.grad[i]), std::abs(fd), 1e-8});
      if (rel > worst) worst = rel, worst_name = p.name;
      ++checked;
    }
  }
  return {worst < 1e-4, fmt("%.0f parameters checked", double(checked)) +
                            fmt(", worst relative error %.2e", worst) + " (" + worst_name + ")"};
}

// 5 -------------------------------------------------------------------------

Outcome filter_response() {
  const dsp::FilterSpec spec{4, 10.0, 50.0};
  const auto f = dsp::design_butterworth(spec);
  const double wc = 2.0 * 50.0 * std::tan(M_PI * 10.0 / 50.0);
  double worst = 0.0;
  for (double hz : {2.0, 10.0, 20.0}) {
    const double w = 2.0 * 50.0 * std::tan(M_PI * hz / 50.0);
    const double analog = 1.0 / std::sqrt(1.0 + std::pow(w / wc, 8.0));
    worst = std::max(worst, std::abs(dsp::magnitude_response(f, hz, 50.0) - analog) / analog);
  }
  const double cutoff_db = 20.0 * std::log10(dsp::magnitude_response(f, 10.0, 50.0));
  return {worst < 0.01 && std::abs(cutoff_db + 3.01) <= 0.05,
          fmt("max deviation from prototype %.2e", worst) + fmt(", cutoff gain %.4f dB", cutoff_db)};
}

// 6-8: end-to-end runs on the default configuration --------------------------

io::RunConfig config_for(std::uint64_t seed, model::Variant variant = model::Variant::full) {
  io::RunConfig cfg = io::run_config_from_json({{"seed", seed}});
  cfg.model.variant = variant;
  cfg.train.config.seed = seed;
  return cfg;
}

struct Prepared {
  cli::Features off, on;
  double surface_gain_db = 0.0;
  double snr_gap_db = 0.0;  // RIS-on over RIS-off
};

// min_gap_db > 0 lowers the RIS-off SNR when the surface alone falls short of
// that gap. Both datasets still share every random draw.
Prepared prepare(std::uint64_t seed, double min_gap_db = 0.0) {
  const auto cfg = config_for(seed);
  const auto plan = cli::plan_surface(cfg);
  Prepared p;
  p.surface_gain_db = 20.0 * std::log10(plan.coherent_gain());
  const double extra = std::max(0.0, min_gap_db - p.surface_gain_db);
  auto off_cfg = cfg;
  if (extra > 0.0) {
    if (off_cfg.scene.snr_db) *off_cfg.scene.snr_db -= extra;
    else *off_cfg.scene.noise_variance *= std::pow(10.0, extra / 10.0);
  }
  p.snr_gap_db = p.surface_gain_db + extra;
  p.off = cli::preprocess(cli::generate_dataset(off_cfg, nullptr), cfg);
  p.on = cli::preprocess(cli::generate_dataset(cfg, &plan), cfg);
  return p;
}

double accuracy(const cli::Features& f, std::uint64_t seed, model::Variant v, const std::string& tag) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli::train_and_evaluate(f, config_for(seed, v), {}, nullptr);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  progress(tag + " seed " + std::to_string(seed) + ": test accuracy " + fmt("%.4f", r.test.accuracy) +
           fmt(" (best epoch %.0f", double(r.report.best_epoch)) + fmt(", %.0f s)", secs));
  return r.test.accuracy;
}

Outcome end_to_end() {
  const auto p = prepare(1);
  const double acc = accuracy(p.on, 1, model::Variant::full, model::to_string(model::Variant::full));
  return {acc >= 0.90, fmt("test accuracy %.4f (floor 0.90)", acc) +
                           fmt(", %.0f test segments", double(p.on.split.test.size()))};
}

Outcome ris_contrast() {
  bool strict = true, boosted = true;
  double mean_off = 0.0, mean_on = 0.0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto p = prepare(seed, 10.0);
    const double off = accuracy(p.off, seed, model::Variant::full, "ris-off");
    const double on = accuracy(p.on, seed, model::Variant::full, "ris-on");
    strict = strict && on > off;
    boosted = boosted && p.snr_gap_db >= 10.0;
    mean_off += off / 3.0;
    mean_on += on / 3.0;
    detail += fmt(" s%.0f:", double(seed)) + fmt("%.3f", off) + fmt("->%.3f", on) +
              fmt("(+%.1f dB", p.snr_gap_db) + fmt(", surface %.1f dB)", p.surface_gain_db);
  }
  return {strict && boosted && mean_on >= mean_off,
          fmt("mean off %.4f", mean_off) + fmt(" on %.4f;", mean_on) + detail};
}

Outcome ablation() {
  using model::Variant;
  const std::vector<Variant> variants{Variant::full, Variant::concat_fusion, Variant::freq_only,
                                      Variant::time_only};
  std::map<Variant, double> mean;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto p = prepare(seed);
    for (Variant v : variants) mean[v] += accuracy(p.on, seed, v, model::to_string(v)) / 3.0;
  }
  const double single = std::min(mean[Variant::freq_only], mean[Variant::time_only]);
  const double tol = 0.01;
  const bool ok = mean[Variant::full] >= mean[Variant::concat_fusion] - tol &&
                  mean[Variant::concat_fusion] >= single - tol;
  std::string detail = "mean accuracy over 3 seeds:";
  for (Variant v : variants) detail += " " + model::to_string(v) + fmt("=%.4f", mean[v]);
  return {ok, detail};
}

// 9 -------------------------------------------------------------------------

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"thruwall"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "thruwall_acceptance_c9";
  fs::remove_all(root);
  fs::create_directories(root);
  // Short training keeps the check quick; determinism does not depend on length.
  io::write_json(root / "config.json", {{"train", {{"epochs", 2}}}});
  std::vector<std::vector<Bytes>> artifacts;
  for (const char* run : {"a", "b"}) {
    const std::string out = (root / run).string();
    const std::vector<std::string> base{"--config", (root / "config.json").string(), "--out", out,
                                        "--seed", "5"};
    auto with = [&](std::vector<std::string> extra) {
      auto v = base;
      v.insert(v.end(), extra.begin(), extra.end());
      return v;
    };
    if (cli(with({"gen-data"})) != 0 ||
        cli(with({"preprocess", "--input", out + "/data/ris_on.twd"})) != 0 ||
        cli(with({"train", "--input", out + "/features/ris_on.twd", "--name", "r"})) != 0)
      return {false, std::string("pipeline failed in run ") + run};
    artifacts.push_back({io::read_file(fs::path(out) / "data/ris_off.twd"),
                         io::read_file(fs::path(out) / "data/ris_on.twd"),
                         io::read_file(fs::path(out) / "features/ris_on.twd"),
                         io::read_file(fs::path(out) / "runs/r/checkpoint.ckpt")});
  }
  const char* names[] = {"ris_off.twd", "ris_on.twd", "features", "checkpoint"};
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < 4; ++i) {
    const bool same = artifacts[0][i] == artifacts[1][i];
    ok = ok && same;
    detail += std::string(" ") + names[i] + (same ? " identical" : " DIFFER");
  }
  fs::remove_all(root);
  return {ok, "two seeded runs:" + detail};
}

// 10 ------------------------------------------------------------------------

Outcome segmentation() {
  const std::size_t per_stream = dsp::segment_count(2000, 250, 250);
  // Seven activities, six participants, twenty trials each; every trial is a
  // 2000-step sequence windowed at 250.
  const std::size_t trials = 7 * 6 * 20;
  const std::size_t corpus = trials * dsp::segment_count(2000, 250, 250);
  const double rel = std::abs(double(corpus) - 5000.0) / 5000.0;
  const bool seg_ok = per_stream == 8;
  return {seg_ok && rel <= 0.10,
          "segments(2000,250,250)=" + std::to_string(per_stream) + (seg_ok ? " ok" : " WRONG") +
              "; corpus " + std::to_string(trials) + " trials -> " + std::to_string(corpus) +
              fmt(" segments, %.1f%% from 5000 (limit 10%%)", 100.0 * rel)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thruwall acceptance checks"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criteria to run (default: all)")
      ->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (int i = 1; i <= 10; ++i) selected.push_back(i);

  const std::map<int, std::function<Outcome()>> checks{
      {1, wall_attenuation}, {2, greedy_gain},  {3, ssm_oracles},   {4, gradient_check},
      {5, filter_response},  {6, end_to_end},   {7, ris_contrast},  {8, ablation},
      {9, determinism},      {10, segmentation}};

  int failures = 0;
  for (int id : selected) {
    Outcome o;
    try {
      o = checks.at(id)();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail
              << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
