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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "thruwall/channel/csi.hpp"
#include "thruwall/common/matrix.hpp"

namespace thruwall::dsp {

/// Element-wise modulus, shape preserved.
RealMatrix amplitude(const channel::CsiFrame& frame);

/// One labeled recording, [time x channels].
struct FeatureStream {
  RealMatrix data;
  int label = -1;
};

/// Dense [segments x time_steps x channels] tensor with one label per segment.
struct FeatureTensor {
  std::size_t segments = 0;
  std::size_t time_steps = 0;
  std::size_t channels = 0;
  std::vector<double> data;
  std::vector<int> labels;

  double& at(std::size_t s, std::size_t t, std::size_t c) {
    return data[(s * time_steps + t) * channels + c];
  }
  double at(std::size_t s, std::size_t t, std::size_t c) const {
    return data[(s * time_steps + t) * channels + c];
  }
  std::span<const double> segment(std::size_t s) const {
    return {data.data() + s * time_steps * channels, time_steps * channels};
  }
};

/// floor((length - window) / stride) + 1, or 0 when window > length.
std::size_t segment_count(std::size_t length, std::size_t window, std::size_t stride);

FeatureTensor segment(const FeatureStream& stream, std::size_t window, std::size_t stride);

/// Appends every segment of `more` to `into` (shapes must agree).
void append_segments(FeatureTensor& into, const FeatureTensor& more);

enum class NormalizationMode { zscore_per_channel, global_minmax };

struct NormalizationStats {
  NormalizationMode mode = NormalizationMode::zscore_per_channel;
  std::vector<double> mean;    // per channel (z-score)
  std::vector<double> stddev;  // per channel (z-score)
  double min = 0.0;            // global (min-max)
  double max = 1.0;            // global (min-max)
  std::vector<std::size_t> flagged_channels;  // zero spread; identity applied
  bool flagged_global = false;

  nlohmann::json to_json() const;
  static NormalizationStats from_json(const nlohmann::json& j);
};

/// Statistics over the listed segments (all segments when empty).
NormalizationStats fit_normalization(const FeatureTensor& tensor, NormalizationMode mode,
                                     std::span<const std::size_t> segments = {});
FeatureTensor apply_normalization(const FeatureTensor& tensor, const NormalizationStats& stats);

/// Fit on the whole tensor and apply.
FeatureTensor normalize(const FeatureTensor& tensor, NormalizationMode mode,
                        NormalizationStats* stats_out = nullptr);

std::string to_string(NormalizationMode mode);
NormalizationMode normalization_mode_from_string(const std::string& name);

}  // namespace thruwall::dsp
