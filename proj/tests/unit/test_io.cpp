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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "thruwall/cli/commands.hpp"
#include "thruwall/common/error.hpp"
#include "thruwall/io/container.hpp"
#include "thruwall/io/files.hpp"
#include "thruwall/io/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace thruwall;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("thruwall_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

io::Dataset random_dataset(io::PayloadKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  io::Dataset ds;
  ds.header.kind = kind;
  ds.header.freq_bins = 3;
  ds.header.time_samples = 5;
  ds.header.sample_rate = 50.0;
  ds.header.class_names = {"walk", "sit"};
  for (std::uint32_t r = 0; r < 4; ++r) {
    io::DatasetRecord rec;
    rec.label = r % 2;
    rec.payload.resize(ds.header.values_per_record());
    for (auto& v : rec.payload) v = d(rng);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

json tiny_config() {
  return {{"seed", 3},
          {"scene", {{"freq_bins", 8}, {"time_samples", 60}}},
          {"dataset", {{"samples_per_class", 8}}},
          {"surface", {{"rows", 4}, {"cols", 4}, {"gain_trials", 5}}},
          {"preprocess", {{"window", 30}, {"stride", 30}}},
          {"model", {{"input_len", 30}, {"input_channels", 8}, {"model_dim", 8}, {"state_dim", 4}}},
          {"train", {{"epochs", 2}, {"batch_size", 16}}}};
}

struct CliResult {
  int code;
  std::string out, err;
  json last_line() const {
    std::istringstream in(out);
    std::string line, last;
    while (std::getline(in, line))
      if (!line.empty()) last = line;
    return json::parse(last);
  }
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "thruwall");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("container roundtrip is lossless and byte stable") {
  for (auto kind : {io::PayloadKind::complex_iq, io::PayloadKind::real}) {
    const auto ds = random_dataset(kind, 1);
    const auto bytes = io::encode_dataset(ds);
    CHECK(std::string(bytes.begin(), bytes.begin() + 12) == "THRUWALLDSET");
    const auto back = io::decode_dataset(bytes);
    CHECK(back.header.class_names == ds.header.class_names);
    CHECK(back.header.kind == kind);
    REQUIRE(back.records.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      CHECK(back.records[i].label == ds.records[i].label);
      CHECK(back.records[i].payload == ds.records[i].payload);
    }
    CHECK(io::encode_dataset(back) == bytes);
  }
}

TEST_CASE("corrupted or truncated containers are refused") {
  const auto bytes = io::encode_dataset(random_dataset(io::PayloadKind::real, 2));
  for (std::size_t pos : {std::size_t{20}, bytes.size() / 2, bytes.size() - 5}) {
    auto bad = bytes;
    bad[pos] ^= 0x40;
    try {
      io::decode_dataset(bad);
      FAIL("accepted a corrupted container");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::checksum);
    }
  }
  const Bytes truncated(bytes.begin(), bytes.begin() + 10);
  CHECK_THROWS_AS(io::decode_dataset(truncated), Error);
}

TEST_CASE("frames and feature tensors survive the container") {
  const auto ds = random_dataset(io::PayloadKind::complex_iq, 3);
  const auto frames = io::frames_from_dataset(ds);
  REQUIRE(frames.size() == 4);
  CHECK(frames[1].data(2, 4).real() == ds.records[1].payload[2 * (2 * 5 + 4)]);
  CHECK(frames[1].data(2, 4).imag() == ds.records[1].payload[2 * (2 * 5 + 4) + 1]);
  const auto again = io::dataset_from_frames(frames, ds.header.class_names);
  CHECK(io::encode_dataset(again) == io::encode_dataset(ds));

  dsp::FeatureTensor t;
  t.segments = 2;
  t.time_steps = 4;
  t.channels = 3;
  for (int i = 0; i < 24; ++i) t.data.push_back(i * 0.5);
  t.labels = {1, 0};
  const auto real = io::dataset_from_features(t, 50.0, {"a", "b"});
  const auto back = io::features_from_dataset(io::decode_dataset(io::encode_dataset(real)));
  CHECK(back.data == t.data);
  CHECK(back.labels == t.labels);
}

TEST_CASE("atomic writes and hashing") {
  const fs::path dir = scratch("files");
  const fs::path f = dir / "nested" / "x.txt";
  io::write_atomic(f, std::string_view("hello"));
  CHECK(io::read_text(f) == "hello");
  io::write_atomic(f, std::string_view("bye"));
  CHECK(io::read_text(f) == "bye");
  for (const auto& e : fs::directory_iterator(dir / "nested")) CHECK(e.path().filename() == "x.txt");
  CHECK(io::hex64(io::fnv1a64("")) == "cbf29ce484222325");
  CHECK(io::hex64(io::fnv1a64("a")) == "af63dc4c8601ec8c");
  try {
    io::read_file(dir / "missing");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}

TEST_CASE("run configuration defaults, roundtrip and rejection") {
  const auto def = io::run_config_from_json(json::object());
  CHECK(def.seed == 1);
  CHECK(def.scene.freq_bins == 64);
  CHECK(def.scene.time_samples == 150);
  CHECK(def.dataset.class_names().size() == 6);
  CHECK(def.surface.rows == 16);
  CHECK(def.model.input_len == 150);

  const auto j = io::to_json(def);
  CHECK(io::to_json(io::run_config_from_json(j)) == j);
  auto moved = j;
  moved["output_dir"] = "/elsewhere";
  CHECK(io::config_hash(io::run_config_from_json(moved)) == io::config_hash(def));
  moved["seed"] = 2;
  CHECK(io::config_hash(io::run_config_from_json(moved)) != io::config_hash(def));

  auto expect_config_error = [](const json& bad) {
    try {
      io::run_config_from_json(bad);
      FAIL("accepted " << bad.dump());
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::configuration);
    }
  };
  expect_config_error({{"sede", 1}});
  expect_config_error({{"scene", {{"wall", {{"thickness", 1}}}}}});
  expect_config_error({{"preprocess", {{"window", 100}}}});             // model.input_len differs
  expect_config_error({{"preprocess", {{"cutoff_hz", 30.0}}}});         // above Nyquist
  expect_config_error({{"scene", {{"snr_db", 5}, {"noise_variance", 0.1}}}});
  expect_config_error({{"dataset", {{"classes", {"walk", "juggle"}}}}});

  const auto link = io::link_budget_report(def);
  CHECK(link["received_power_dbm"].get<double>() == doctest::Approx(-98.52).epsilon(1e-5));
  CHECK(link["wall_thickness_m"].get<double>() == doctest::Approx(io::kCalibratedWallThickness));
}

TEST_CASE("CLI usage and error reporting") {
  const fs::path dir = scratch("cli_errors");
  auto r = run({"--out", dir.string(), "train"});
  CHECK(r.code == 2);

  r = run({"--out", dir.string(), "preprocess", "--input", (dir / "nope.twd").string()});
  CHECK(r.code == 3);
  auto err = r.last_line();
  CHECK(err["status"] == "error");
  CHECK(err["exit_code"] == 3);
  CHECK(err["error"]["kind"] == "io");

  io::write_json(dir / "bad.json", {{"bogus", 1}});
  r = run({"--config", (dir / "bad.json").string(), "gen-data"});
  CHECK(r.code == 2);
  CHECK(r.last_line()["error"]["kind"] == "configuration");

  auto bytes = io::encode_dataset(random_dataset(io::PayloadKind::complex_iq, 4));
  bytes[30] ^= 1;
  io::write_atomic(dir / "corrupt.twd", bytes);
  r = run({"--out", dir.string(), "preprocess", "--input", (dir / "corrupt.twd").string()});
  CHECK(r.code == 4);
  CHECK(r.last_line()["error"]["kind"] == "checksum");
  CHECK_FALSE(fs::exists(dir / "features"));
}

TEST_CASE("CLI end to end on a tiny configuration") {
  const fs::path dir = scratch("cli_e2e");
  const fs::path cfg = dir / "config.json";
  io::write_json(cfg, tiny_config());
  const std::string out = (dir / "out").string();
  auto cli = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", cfg.string(), "--out", out, "--threads", "2"});
    auto r = run(args);
    INFO(r.out);
    REQUIRE(r.code == 0);
    // Every stderr line is a JSON object.
    std::istringstream in(r.err);
    std::string line;
    while (std::getline(in, line)) CHECK(json::accept(line));
    return r;
  };
  const fs::path root = out;

  cli({"gen-data"});
  for (const char* f : {"ris_off", "ris_on"}) {
    CHECK(fs::exists(root / "data" / (std::string(f) + ".twd")));
    const auto prov = io::read_json(root / "data" / (std::string(f) + ".twd.provenance.json"));
    CHECK(prov["seed"] == 3);
    CHECK(prov["records"] == 48);
    // The recorded CRC is the container trailer (little-endian u32).
    const auto raw = io::read_file(root / "data" / (std::string(f) + ".twd"));
    const std::uint32_t trailer = raw[raw.size() - 4] | (raw[raw.size() - 3] << 8) |
                                  (raw[raw.size() - 2] << 16) |
                                  (std::uint32_t(raw[raw.size() - 1]) << 24);
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", trailer);
    CHECK(prov["crc32"] == hex);
  }
  const auto first = io::read_file(root / "data" / "ris_on.twd");
  cli({"gen-data"});
  CHECK(io::read_file(root / "data" / "ris_on.twd") == first);

  cli({"ris-optimize"});
  CHECK(count_lines(root / "ris" / "trace.csv") == 1 + 4 + 4 + 1);
  const auto phases = io::read_json(root / "ris" / "phase_config.json");
  CHECK(phases["rows"] == 4);

  for (const char* f : {"ris_off", "ris_on"})
    cli({"preprocess", "--input", (root / "data" / (std::string(f) + ".twd")).string()});
  const auto meta = io::read_json(root / "features" / "ris_on.twd.meta.json");
  CHECK(meta["segments"] == 96);

  for (const char* f : {"ris_off", "ris_on"})
    cli({"train", "--input", (root / "features" / (std::string(f) + ".twd")).string(), "--name", f});
  const fs::path run_on = root / "runs" / "ris_on";
  for (const char* f : {"checkpoint.ckpt", "history.csv", "training.json", "metrics.json",
                        "confusion.csv", "run.json"})
    CHECK(fs::exists(run_on / f));
  CHECK(count_lines(run_on / "history.csv") == 3);
  const auto metrics = io::read_json(run_on / "metrics.json");

  // Evaluating the saved checkpoint on the test split reproduces the training metrics.
  cli({"eval", "--checkpoint", (run_on / "checkpoint.ckpt").string(), "--input",
       (root / "features" / "ris_on.twd").string(), "--split", "test", "--output",
       (dir / "eval.json").string()});
  const auto ev = io::read_json(dir / "eval.json");
  CHECK(ev["accuracy"].get<double>() == metrics["accuracy"].get<double>());
  CHECK(ev["macro_f1"].get<double>() == metrics["macro_f1"].get<double>());

  cli({"report", "--runs", (root / "runs" / "ris_off").string(), run_on.string()});
  CHECK(count_lines(root / "report" / "report.csv") == 3);
  CHECK(count_lines(root / "report" / "surface_deltas.csv") >= 2);
  const auto report = io::read_json(root / "report" / "report.json");
  CHECK(report["runs"].size() == 2);
}
