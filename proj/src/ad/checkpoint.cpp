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

#include "thruwall/ad/checkpoint.hpp"

#include <unordered_map>

namespace thruwall::ad {

Bytes encode_checkpoint(const ParameterSet& params, const nlohmann::json& metadata) {
  nlohmann::json tensors = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& p : params.all()) {
    tensors.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", offset}, {"count", p.size()}});
    offset += p.size();
  }
  const nlohmann::json manifest = {
      {"dtype", "float64"}, {"tensors", tensors}, {"metadata", metadata}};

  ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.str(manifest.dump());
  for (const auto& p : params.all())
    for (double v : p.value) w.f64(v);
  const std::uint32_t c = crc32_of(w.bytes());
  w.u32(c);
  return w.take();
}

DecodedCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= kCheckpointMagic.size() + 4 + 8 + 4, ErrorKind::format,
          "checkpoint is truncated");
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  require(tail.u32() == crc32_of(body), ErrorKind::checksum, "checkpoint checksum mismatch");

  ByteReader r(body);
  require(r.raw(kCheckpointMagic.size()) == kCheckpointMagic, ErrorKind::format,
          "not a checkpoint file");
  const std::uint32_t version = r.u32();
  require(version == kCheckpointVersion, ErrorKind::format,
          "unsupported checkpoint version " + std::to_string(version));

  DecodedCheckpoint out;
  try {
    out.manifest = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("checkpoint manifest: ") + e.what());
  }
  require(out.manifest.value("dtype", "") == "float64", ErrorKind::format,
          "checkpoint dtype must be float64");
  std::size_t expected_offset = 0;
  for (const auto& t : out.manifest.at("tensors")) {
    const auto count = t.at("count").get<std::size_t>();
    require(t.at("offset").get<std::size_t>() == expected_offset, ErrorKind::format,
            "checkpoint tensors are not contiguous");
    require(numel(t.at("shape").get<Shape>()) == count, ErrorKind::format,
            "checkpoint tensor count disagrees with its shape");
    require(count <= r.remaining() / 8, ErrorKind::format, "checkpoint blob is truncated");
    std::vector<double> v(count);
    for (double& x : v) x = r.f64();
    out.values.push_back(std::move(v));
    expected_offset += count;
  }
  require(r.remaining() == 0, ErrorKind::format, "trailing bytes after checkpoint blob");
  return out;
}

void load_into(const DecodedCheckpoint& ckpt, ParameterSet& params) {
  const auto& tensors = ckpt.manifest.at("tensors");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < tensors.size(); ++i)
    index[tensors[i].at("name").get<std::string>()] = i;
  require(index.size() == params.count(), ErrorKind::format,
          "checkpoint holds " + std::to_string(index.size()) + " tensors, model expects " +
              std::to_string(params.count()));
  for (auto& p : params.all()) {
    auto it = index.find(p.name);
    require(it != index.end(), ErrorKind::format, "checkpoint lacks parameter '" + p.name + "'");
    require(tensors[it->second].at("shape").get<Shape>() == p.shape, ErrorKind::format,
            "checkpoint shape mismatch for '" + p.name + "'");
    p.value = ckpt.values[it->second];
  }
}

}  // namespace thruwall::ad
