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
#include <string>

#include <json.hpp>

#include "thruwall/kernels/scan.hpp"

namespace thruwall::model {

enum class Variant { full, concat_fusion, freq_only, time_only };

enum class PositionalEncoding { learned, sinusoidal };

/// Axis the frequency stream scans over. `time` keeps both streams at
/// [B, L, D]; `channel` transposes the input so the frequency stream runs
/// over the M subcarriers instead.
enum class FrequencyAxis { time, channel };

struct ModelConfig {
  std::size_t input_len = 150;       // L
  std::size_t input_channels = 64;   // M
  std::size_t model_dim = 32;        // D
  std::size_t state_dim = 8;         // N
  std::size_t num_blocks = 2;        // per stream
  std::size_t conv_kernel_width = 4;
  std::size_t num_classes = 6;
  double dropout = 0.0;
  Variant variant = Variant::full;
  PositionalEncoding positional = PositionalEncoding::learned;
  FrequencyAxis frequency_axis = FrequencyAxis::time;
  kernels::ScanMode scan_mode = kernels::ScanMode::sequential;

  bool uses_freq() const noexcept { return variant != Variant::time_only; }
  bool uses_time() const noexcept { return variant != Variant::freq_only; }
  /// Width of the vector handed to the head: 2D for two streams, D otherwise.
  std::size_t head_input_dim() const noexcept {
    return (uses_freq() && uses_time()) ? 2 * model_dim : model_dim;
  }
  /// Sequence length seen by the frequency stream.
  std::size_t freq_seq_len() const noexcept {
    return frequency_axis == FrequencyAxis::time ? input_len : input_channels;
  }

  void validate() const;
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);
std::string to_string(PositionalEncoding p);
std::string to_string(FrequencyAxis a);
std::string to_string(kernels::ScanMode m);

nlohmann::json to_json(const ModelConfig& config);
/// Missing keys keep their defaults; unknown keys are a configuration error.
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace thruwall::model
