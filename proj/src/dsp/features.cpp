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

#include "thruwall/dsp/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "thruwall/common/error.hpp"

namespace thruwall::dsp {

RealMatrix amplitude(const channel::CsiFrame& frame) {
  const auto& in = frame.data;
  RealMatrix out(in.rows(), in.cols());
  for (std::size_t i = 0; i < in.size(); ++i) out.data()[i] = std::abs(in.data()[i]);
  return out;
}

std::size_t segment_count(std::size_t length, std::size_t window, std::size_t stride) {
  require(stride >= 1, ErrorKind::invalid_argument, "stride must be >= 1");
  if (window == 0 || window > length) return 0;
  return (length - window) / stride + 1;
}

FeatureTensor segment(const FeatureStream& stream, std::size_t window, std::size_t stride) {
  const std::size_t length = stream.data.rows();
  const std::size_t count = segment_count(length, window, stride);
  require(count > 0, ErrorKind::length,
          "window of " + std::to_string(window) + " exceeds stream length " + std::to_string(length));
  FeatureTensor t;
  t.segments = count;
  t.time_steps = window;
  t.channels = stream.data.cols();
  t.data.reserve(count * window * t.channels);
  for (std::size_t s = 0; s < count; ++s) {
    const auto begin = stream.data.data().begin() +
                       static_cast<std::ptrdiff_t>(s * stride * t.channels);
    t.data.insert(t.data.end(), begin, begin + static_cast<std::ptrdiff_t>(window * t.channels));
    t.labels.push_back(stream.label);
  }
  return t;
}

void append_segments(FeatureTensor& into, const FeatureTensor& more) {
  if (into.segments == 0 && into.data.empty()) {
    into = more;
    return;
  }
  require(into.time_steps == more.time_steps && into.channels == more.channels,
          ErrorKind::dimension, "segment shapes differ");
  into.data.insert(into.data.end(), more.data.begin(), more.data.end());
  into.labels.insert(into.labels.end(), more.labels.begin(), more.labels.end());
  into.segments += more.segments;
}

std::string to_string(NormalizationMode mode) {
  return mode == NormalizationMode::zscore_per_channel ? "zscore_per_channel" : "global_minmax";
}

NormalizationMode normalization_mode_from_string(const std::string& name) {
  if (name == "zscore_per_channel") return NormalizationMode::zscore_per_channel;
  if (name == "global_minmax") return NormalizationMode::global_minmax;
  throw Error(ErrorKind::configuration, "unknown normalization mode '" + name + "'");
}

NormalizationStats fit_normalization(const FeatureTensor& tensor, NormalizationMode mode,
                                     std::span<const std::size_t> segments) {
  std::vector<std::size_t> all;
  if (segments.empty()) {
    all.resize(tensor.segments);
    std::iota(all.begin(), all.end(), std::size_t{0});
    segments = all;
  }
  require(!segments.empty(), ErrorKind::invalid_argument, "nothing to fit normalization on");

  NormalizationStats st;
  st.mode = mode;
  const std::size_t C = tensor.channels;
  if (mode == NormalizationMode::zscore_per_channel) {
    st.mean.assign(C, 0.0);
    st.stddev.assign(C, 1.0);
    const double n = static_cast<double>(segments.size() * tensor.time_steps);
    for (std::size_t c = 0; c < C; ++c) {
      double sum = 0.0;
      for (auto s : segments)
        for (std::size_t t = 0; t < tensor.time_steps; ++t) sum += tensor.at(s, t, c);
      const double mean = sum / n;
      double var = 0.0;
      for (auto s : segments)
        for (std::size_t t = 0; t < tensor.time_steps; ++t) {
          const double d = tensor.at(s, t, c) - mean;
          var += d * d;
        }
      var /= n;
      if (var > 0.0 && std::isfinite(var)) {
        st.mean[c] = mean;
        st.stddev[c] = std::sqrt(var);
      } else {
        st.flagged_channels.push_back(c);
      }
    }
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto s : segments)
      for (double v : tensor.segment(s)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    if (hi > lo) {
      st.min = lo;
      st.max = hi;
    } else {
      st.flagged_global = true;
      st.min = 0.0;
      st.max = 1.0;
    }
  }
  return st;
}

FeatureTensor apply_normalization(const FeatureTensor& tensor, const NormalizationStats& stats) {
  FeatureTensor out = tensor;
  const std::size_t C = tensor.channels;
  if (stats.mode == NormalizationMode::zscore_per_channel) {
    require(stats.mean.size() == C && stats.stddev.size() == C, ErrorKind::dimension,
            "normalization statistics do not match the channel count");
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      const std::size_t c = i % C;
      out.data[i] = (out.data[i] - stats.mean[c]) / stats.stddev[c];
    }
  } else {
    const double span = stats.max - stats.min;
    for (double& v : out.data) v = (v - stats.min) / span;
  }
  return out;
}

FeatureTensor normalize(const FeatureTensor& tensor, NormalizationMode mode,
                        NormalizationStats* stats_out) {
  const auto st = fit_normalization(tensor, mode);
  if (stats_out) *stats_out = st;
  return apply_normalization(tensor, st);
}

nlohmann::json NormalizationStats::to_json() const {
  return {{"mode", to_string(mode)},
          {"mean", mean},
          {"stddev", stddev},
          {"min", min},
          {"max", max},
          {"flagged_channels", flagged_channels},
          {"flagged_global", flagged_global}};
}

NormalizationStats NormalizationStats::from_json(const nlohmann::json& j) {
  try {
    NormalizationStats st;
    st.mode = normalization_mode_from_string(j.at("mode").get<std::string>());
    st.mean = j.at("mean").get<std::vector<double>>();
    st.stddev = j.at("stddev").get<std::vector<double>>();
    st.min = j.at("min").get<double>();
    st.max = j.at("max").get<double>();
    st.flagged_channels = j.at("flagged_channels").get<std::vector<std::size_t>>();
    st.flagged_global = j.at("flagged_global").get<bool>();
    return st;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed normalization statistics: ") + e.what());
  }
}

}  // namespace thruwall::dsp
