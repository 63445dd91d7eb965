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

#include "thruwall/io/container.hpp"

#include "thruwall/io/files.hpp"

namespace thruwall::io {

void Dataset::validate() const {
  require(header.kind == PayloadKind::complex_iq || header.kind == PayloadKind::real,
          ErrorKind::format, "unknown payload kind");
  require(header.freq_bins > 0 && header.time_samples > 0, ErrorKind::format,
          "container dimensions must be positive");
  require(header.sample_rate > 0.0, ErrorKind::format, "sample rate must be positive");
  require(!header.class_names.empty(), ErrorKind::format, "container lists no classes");
  const std::size_t per = header.values_per_record();
  for (std::size_t i = 0; i < records.size(); ++i) {
    require(records[i].payload.size() == per, ErrorKind::format,
            "record " + std::to_string(i) + " does not match the header shape");
    require(records[i].label < header.class_names.size(), ErrorKind::format,
            "record " + std::to_string(i) + " has an unknown class id");
  }
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(static_cast<int>(r.label));
  return out;
}

Bytes encode_dataset(const Dataset& d) {
  d.validate();
  ByteWriter w;
  w.raw(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(d.header.kind));
  w.u64(d.header.freq_bins);
  w.u64(d.header.time_samples);
  w.f64(d.header.sample_rate);
  w.u64(d.header.class_names.size());
  for (const auto& n : d.header.class_names) w.str(n);
  w.u64(d.records.size());
  for (const auto& r : d.records) {
    w.u32(r.label);
    for (double v : r.payload) w.f64(v);
  }
  const std::uint32_t c = crc32_of(w.bytes());
  w.u32(c);
  return w.take();
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= kDatasetMagic.size() + 8, ErrorKind::format, "dataset file is truncated");
  ByteReader head(bytes);
  require(head.raw(kDatasetMagic.size()) == kDatasetMagic, ErrorKind::format,
          "not a dataset container");
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  require(tail.u32() == crc32_of(body), ErrorKind::checksum,
          "dataset checksum mismatch; refusing to load");

  ByteReader r(body);
  r.raw(kDatasetMagic.size());
  const std::uint32_t version = r.u32();
  require(version == kDatasetVersion, ErrorKind::format,
          "unsupported dataset version " + std::to_string(version));
  Dataset d;
  const std::uint32_t kind = r.u32();
  require(kind <= 1, ErrorKind::format, "unknown payload kind " + std::to_string(kind));
  d.header.kind = static_cast<PayloadKind>(kind);
  d.header.freq_bins = r.u64();
  d.header.time_samples = r.u64();
  d.header.sample_rate = r.f64();
  const std::uint64_t classes = r.u64();
  require(classes <= r.remaining(), ErrorKind::format, "class count runs past the end");
  for (std::uint64_t i = 0; i < classes; ++i) d.header.class_names.push_back(r.str());
  const std::uint64_t count = r.u64();
  const std::size_t per = d.header.values_per_record();
  require(per > 0 && count <= r.remaining() / (4 + 8 * per), ErrorKind::format,
          "record count runs past the end");
  d.records.resize(count);
  for (auto& rec : d.records) {
    rec.label = r.u32();
    rec.payload.resize(per);
    for (double& v : rec.payload) v = r.f64();
  }
  require(r.remaining() == 0, ErrorKind::format, "trailing bytes after the last record");
  d.validate();
  return d;
}

Dataset dataset_from_frames(const std::vector<channel::CsiFrame>& frames,
                            std::vector<std::string> class_names) {
  require(!frames.empty(), ErrorKind::invalid_argument, "no frames to store");
  Dataset d;
  d.header.kind = PayloadKind::complex_iq;
  d.header.freq_bins = frames.front().data.rows();
  d.header.time_samples = frames.front().data.cols();
  d.header.sample_rate = frames.front().sample_rate;
  d.header.class_names = std::move(class_names);
  for (const auto& f : frames) {
    require(f.data.rows() == d.header.freq_bins && f.data.cols() == d.header.time_samples,
            ErrorKind::dimension, "frames differ in shape");
    require(f.label.has_value() && *f.label >= 0, ErrorKind::invalid_argument,
            "every stored frame needs a label");
    DatasetRecord rec;
    rec.label = static_cast<std::uint32_t>(*f.label);
    rec.payload.reserve(f.data.size() * 2);
    for (const Complex& v : f.data.data()) {
      rec.payload.push_back(v.real());
      rec.payload.push_back(v.imag());
    }
    d.records.push_back(std::move(rec));
  }
  d.validate();
  return d;
}

std::vector<channel::CsiFrame> frames_from_dataset(const Dataset& d) {
  require(d.header.kind == PayloadKind::complex_iq, ErrorKind::format,
          "expected a complex CSI container");
  std::vector<channel::CsiFrame> out;
  out.reserve(d.records.size());
  for (const auto& rec : d.records) {
    channel::CsiFrame f;
    f.data = ComplexMatrix(d.header.freq_bins, d.header.time_samples);
    for (std::size_t i = 0; i < f.data.size(); ++i)
      f.data.data()[i] = Complex(rec.payload[2 * i], rec.payload[2 * i + 1]);
    f.sample_rate = d.header.sample_rate;
    f.label = static_cast<int>(rec.label);
    out.push_back(std::move(f));
  }
  return out;
}

dsp::FeatureTensor features_from_dataset(const Dataset& d) {
  require(d.header.kind == PayloadKind::real, ErrorKind::format,
          "expected a real-valued feature container");
  dsp::FeatureTensor t;
  t.segments = d.records.size();
  t.time_steps = d.header.time_samples;
  t.channels = d.header.freq_bins;
  t.data.resize(t.segments * t.time_steps * t.channels);
  for (std::size_t s = 0; s < t.segments; ++s) {
    const auto& p = d.records[s].payload;
    for (std::size_t c = 0; c < t.channels; ++c)
      for (std::size_t k = 0; k < t.time_steps; ++k) t.at(s, k, c) = p[c * t.time_steps + k];
    t.labels.push_back(static_cast<int>(d.records[s].label));
  }
  return t;
}

Dataset dataset_from_features(const dsp::FeatureTensor& t, double sample_rate,
                              std::vector<std::string> class_names) {
  Dataset d;
  d.header.kind = PayloadKind::real;
  d.header.freq_bins = t.channels;
  d.header.time_samples = t.time_steps;
  d.header.sample_rate = sample_rate;
  d.header.class_names = std::move(class_names);
  require(t.labels.size() == t.segments, ErrorKind::dimension, "one label per segment required");
  for (std::size_t s = 0; s < t.segments; ++s) {
    require(t.labels[s] >= 0, ErrorKind::invalid_argument, "negative label");
    DatasetRecord rec;
    rec.label = static_cast<std::uint32_t>(t.labels[s]);
    rec.payload.resize(t.channels * t.time_steps);
    for (std::size_t c = 0; c < t.channels; ++c)
      for (std::size_t k = 0; k < t.time_steps; ++k)
        rec.payload[c * t.time_steps + k] = t.at(s, k, c);
    d.records.push_back(std::move(rec));
  }
  d.validate();
  return d;
}

}  // namespace thruwall::io
