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

#include "thruwall/model/config.hpp"

#include <set>

#include "thruwall/common/error.hpp"

namespace thruwall::model {

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    require(v > 0, ErrorKind::configuration, std::string(what) + " must be positive");
  };
  positive(input_len, "input_len");
  positive(input_channels, "input_channels");
  positive(model_dim, "model_dim");
  positive(state_dim, "state_dim");
  positive(num_blocks, "num_blocks");
  positive(conv_kernel_width, "conv_kernel_width");
  require(num_classes >= 2, ErrorKind::configuration, "num_classes must be >= 2");
  require(dropout >= 0.0 && dropout < 1.0, ErrorKind::configuration, "dropout must be in [0, 1)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::concat_fusion: return "concat-fusion";
    case Variant::freq_only: return "freq-only";
    case Variant::time_only: return "time-only";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  for (Variant v : {Variant::full, Variant::concat_fusion, Variant::freq_only, Variant::time_only})
    if (to_string(v) == name) return v;
  throw Error(ErrorKind::configuration,
              "unknown variant '" + name + "' (full|concat-fusion|freq-only|time-only)");
}

std::string to_string(PositionalEncoding p) {
  return p == PositionalEncoding::learned ? "learned" : "sinusoidal";
}

std::string to_string(FrequencyAxis a) { return a == FrequencyAxis::time ? "time" : "channel"; }

std::string to_string(kernels::ScanMode m) {
  return m == kernels::ScanMode::parallel ? "parallel" : "sequential";
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"input_len", c.input_len},
          {"input_channels", c.input_channels},
          {"model_dim", c.model_dim},
          {"state_dim", c.state_dim},
          {"num_blocks", c.num_blocks},
          {"conv_kernel_width", c.conv_kernel_width},
          {"num_classes", c.num_classes},
          {"dropout", c.dropout},
          {"variant", to_string(c.variant)},
          {"positional", to_string(c.positional)},
          {"frequency_axis", to_string(c.frequency_axis)},
          {"scan_mode", to_string(c.scan_mode)}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::configuration, "model config must be a JSON object");
  static const std::set<std::string> known = {
      "input_len", "input_channels", "model_dim", "state_dim", "num_blocks", "conv_kernel_width",
      "num_classes", "dropout", "variant", "positional", "frequency_axis", "scan_mode"};
  for (const auto& [key, _] : j.items())
    require(known.count(key) != 0, ErrorKind::configuration, "unknown model key '" + key + "'");

  ModelConfig c;
  try {
    c.input_len = j.value("input_len", c.input_len);
    c.input_channels = j.value("input_channels", c.input_channels);
    c.model_dim = j.value("model_dim", c.model_dim);
    c.state_dim = j.value("state_dim", c.state_dim);
    c.num_blocks = j.value("num_blocks", c.num_blocks);
    c.conv_kernel_width = j.value("conv_kernel_width", c.conv_kernel_width);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.dropout = j.value("dropout", c.dropout);
    if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
    if (j.contains("positional")) {
      const auto p = j.at("positional").get<std::string>();
      require(p == "learned" || p == "sinusoidal", ErrorKind::configuration,
              "positional must be learned or sinusoidal");
      c.positional = p == "learned" ? PositionalEncoding::learned : PositionalEncoding::sinusoidal;
    }
    if (j.contains("frequency_axis")) {
      const auto a = j.at("frequency_axis").get<std::string>();
      require(a == "time" || a == "channel", ErrorKind::configuration,
              "frequency_axis must be time or channel");
      c.frequency_axis = a == "time" ? FrequencyAxis::time : FrequencyAxis::channel;
    }
    if (j.contains("scan_mode")) {
      const auto m = j.at("scan_mode").get<std::string>();
      require(m == "parallel" || m == "sequential", ErrorKind::configuration,
              "scan_mode must be parallel or sequential");
      c.scan_mode = m == "parallel" ? kernels::ScanMode::parallel : kernels::ScanMode::sequential;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::configuration, std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace thruwall::model
