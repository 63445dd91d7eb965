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
#include <optional>
#include <vector>

#include <json.hpp>

#include "thruwall/channel/activity.hpp"
#include "thruwall/dsp/features.hpp"
#include "thruwall/io/container.hpp"
#include "thruwall/io/run_config.hpp"
#include "thruwall/model/himamba.hpp"
#include "thruwall/model/train.hpp"
#include "thruwall/ris/optimizer.hpp"

namespace thruwall::cli {

// Seed streams derived from RunConfig::seed.
inline constexpr std::uint64_t kSurfaceStream = 0x5u;
inline constexpr std::uint64_t kDatasetStream = 0xdau;
inline constexpr std::uint64_t kSplitStream = 0x5b;
inline constexpr std::uint64_t kModelStream = 0x30;
inline constexpr std::uint64_t kTrainStream = 0x7a;
inline constexpr std::uint64_t kGainStream = 0x9a;

/// Surface channel, its greedy configuration and the coupling derived from it.
struct SurfacePlan {
  ris::CascadeChannel channel;
  ris::GreedyResult greedy;
  channel::SurfaceSetup setup;

  /// Amplitude gain the configured aperture gives each path (|sum g w| / ||g||).
  double coherent_gain() const;
};

SurfacePlan plan_surface(const io::RunConfig& config);

/// Complex container. With `plan` the optimized surface is in the path; RIS-on
/// and RIS-off containers drawn from one config share every jitter and noise draw.
io::Dataset generate_dataset(const io::RunConfig& config, const SurfacePlan* plan);

struct Features {
  dsp::FeatureTensor tensor;  // normalized
  model::Split split;         // segment indices
  dsp::NormalizationStats stats;
  std::vector<std::string> class_names;
  double sample_rate = 0.0;

  nlohmann::json meta() const;
};

/// Amplitude, zero-phase low-pass along time, segmentation, then
/// normalization fitted on the training split only. The split is stratified
/// over records so segments of one record never straddle two splits.
Features preprocess(const io::Dataset& complex, const io::RunConfig& config);

/// Amplitude and filtering only, one [time x channels] stream per record.
std::vector<dsp::FeatureStream> filtered_streams(const io::Dataset& complex,
                                                 const io::PreprocessSpec& spec);

struct TrainOutcome {
  model::TrainingReport report;
  model::Metrics test;
};

/// Builds the model from config.model (seeded from config.seed), trains and
/// evaluates on the test split. The trained model is left in `model_out`
/// when given.
TrainOutcome train_and_evaluate(const Features& features, const io::RunConfig& config,
                                const model::EpochCallback& on_epoch = {},
                                std::optional<model::HiMamba>* model_out = nullptr);

}  // namespace thruwall::cli
