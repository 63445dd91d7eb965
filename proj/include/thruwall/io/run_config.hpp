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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thruwall/channel/csi.hpp"
#include "thruwall/channel/link_budget.hpp"
#include "thruwall/dsp/butterworth.hpp"
#include "thruwall/dsp/features.hpp"
#include "thruwall/model/config.hpp"
#include "thruwall/model/train.hpp"
#include "thruwall/ris/optimizer.hpp"

namespace thruwall::io {

/// Slab thickness at which the default link budget closes at -98.52 dBm
/// with a 5.5 / 0.11 S/m wall.
inline constexpr double kCalibratedWallThickness = 1.1115887225;

struct StaticPathSpec {
  double amplitude = 1.0;
  double phase = 0.0;          // rad
  double path_length_m = 3.8;  // delay = length / c
};

struct SceneSpec {
  double carrier_hz = 5.8e9;
  double bandwidth_hz = 160e6;
  std::size_t freq_bins = 64;
  double sample_rate_hz = 50.0;
  std::size_t time_samples = 150;
  channel::WallModel wall{5.5, 0.11, kCalibratedWallThickness};
  std::vector<StaticPathSpec> static_paths{{1.0, 0.0, 3.8}, {0.45, 1.0, 5.1}, {0.3, 2.3, 6.7}};
  /// Exactly one of the two sets the noise. snr_db is relative to the power
  /// of the first static path after the wall.
  std::optional<double> snr_db = 0.0;
  std::optional<double> noise_variance;

  double resolved_noise_variance() const;
  void validate() const;
};

struct DatasetSpec {
  std::size_t samples_per_class = 50;
  std::vector<std::string> classes;  // empty = the six built-in classes
  bool with_ris = true;

  std::vector<std::string> class_names() const;
};

struct SurfaceSpec {
  std::size_t rows = 16;
  std::size_t cols = 16;
  double max_gain = 16.0;
  ris::ChannelModelKind channel_model = ris::ChannelModelKind::iid_gaussian;
  std::size_t gain_trials = 100;
  double noise_variance = 0.0;       // power-meter noise during optimisation
  std::size_t averaging_samples = 1;
};

struct LinkBudgetSpec {
  channel::LinkBudget budget;
  double target_dbm = -98.52;
};

struct PreprocessSpec {
  bool filter = true;
  int filter_order = 4;
  double cutoff_hz = 10.0;
  dsp::NormalizationMode normalization = dsp::NormalizationMode::zscore_per_channel;
  std::size_t window = 150;
  std::size_t stride = 150;
};

struct TrainSpec {
  model::TrainConfig config;
  double train_fraction = 0.70;
  double val_fraction = 0.15;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir;  // empty: $THRUWALL_OUT, else "runs"
  SceneSpec scene;
  DatasetSpec dataset;
  SurfaceSpec surface;
  LinkBudgetSpec link_budget;
  PreprocessSpec preprocess;
  model::ModelConfig model;
  TrainSpec train;

  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are a configuration error.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

/// FNV-1a over the canonical (sorted-key, compact) JSON form.
std::string config_hash(const RunConfig& config);

/// Grids, wall effect, static paths and noise; dynamic paths are added per
/// sample by the activity generator.
channel::Scene build_scene_template(const RunConfig& config);

/// The link budget with the configured wall as its obstruction.
nlohmann::json link_budget_report(const RunConfig& config);

std::string to_string(ris::ChannelModelKind kind);

}  // namespace thruwall::io
