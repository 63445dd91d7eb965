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

#include <json.hpp>

#include "thruwall/ad/tape.hpp"
#include "thruwall/common/bytes.hpp"

namespace thruwall::ad {

// Layout (little-endian):
//   "THRUWALLCKPT"  12-byte magic
//   u32             format version
//   u64 + bytes     JSON manifest: {"dtype", "tensors": [{name, shape, offset, count}],
//                   "metadata": {...}}; offsets count float64 elements
//   f64 * total     parameter values in manifest order
//   u32             CRC-32 of everything above

inline constexpr std::string_view kCheckpointMagic = "THRUWALLCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

Bytes encode_checkpoint(const ParameterSet& params, const nlohmann::json& metadata);

struct DecodedCheckpoint {
  nlohmann::json manifest;
  std::vector<std::vector<double>> values;  // manifest tensor order
};

/// Validates magic, version and checksum; throws checksum/format errors.
DecodedCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Copies decoded values into `params`. Every parameter must be present with
/// the same shape and no extra tensors may remain.
void load_into(const DecodedCheckpoint& ckpt, ParameterSet& params);

}  // namespace thruwall::ad
