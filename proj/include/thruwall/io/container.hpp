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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thruwall/channel/csi.hpp"
#include "thruwall/common/bytes.hpp"
#include "thruwall/dsp/features.hpp"

namespace thruwall::io {

// Layout (little-endian):
//   "THRUWALLDSET" + u32 version       16-byte header prefix
//   u32 payload kind (0 complex, 1 real)
//   u64 freq_bins, u64 time_samples, f64 sample_rate
//   u64 class count, then each name as u64 length + bytes
//   u64 record count
//   per record: u32 label, then freq_bins * time_samples values in
//   frequency-major order (re, im interleaved when complex)
//   u32 CRC-32 of everything above

inline constexpr std::string_view kDatasetMagic = "THRUWALLDSET";
inline constexpr std::uint32_t kDatasetVersion = 1;

enum class PayloadKind : std::uint32_t { complex_iq = 0, real = 1 };

struct DatasetHeader {
  PayloadKind kind = PayloadKind::complex_iq;
  std::size_t freq_bins = 0;
  std::size_t time_samples = 0;
  double sample_rate = 0.0;
  std::vector<std::string> class_names;

  std::size_t values_per_record() const noexcept {
    return freq_bins * time_samples * (kind == PayloadKind::complex_iq ? 2 : 1);
  }
};

struct DatasetRecord {
  std::uint32_t label = 0;
  std::vector<double> payload;
};

struct Dataset {
  DatasetHeader header;
  std::vector<DatasetRecord> records;

  /// Record sizes match the header and labels index class_names.
  void validate() const;
  std::vector<int> labels() const;
};

Bytes encode_dataset(const Dataset& dataset);
/// Refuses (checksum error) when the stored CRC does not match.
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

/// Complex container from labeled frames; every frame must share a shape.
Dataset dataset_from_frames(const std::vector<channel::CsiFrame>& frames,
                            std::vector<std::string> class_names);
std::vector<channel::CsiFrame> frames_from_dataset(const Dataset& dataset);

/// Real container <-> [segments x time x channels] tensor. The container keeps
/// the frequency-major layout, so channels map to freq_bins.
dsp::FeatureTensor features_from_dataset(const Dataset& dataset);
Dataset dataset_from_features(const dsp::FeatureTensor& tensor, double sample_rate,
                              std::vector<std::string> class_names);

}  // namespace thruwall::io
