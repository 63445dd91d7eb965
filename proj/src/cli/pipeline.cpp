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

#include "thruwall/cli/pipeline.hpp"

#include <cmath>

#include "thruwall/common/error.hpp"
#include "thruwall/common/random.hpp"
#include "thruwall/dsp/butterworth.hpp"

namespace thruwall::cli {

double SurfacePlan::coherent_gain() const {
  const auto terms = channel::resolve_ris_terms(
      channel::RisCoupling::full_aperture(setup.grid, 1, setup.element_gains, setup.max_gain),
      greedy.config);
  return terms.front().gain;
}

SurfacePlan plan_surface(const io::RunConfig& config) {
  const ris::GridShape grid{config.surface.rows, config.surface.cols};
  ris::ChannelModelSpec model;
  model.kind = config.surface.channel_model;
  SurfacePlan plan;
  plan.channel = ris::draw_channel(model, grid.elements(), derive_seed(config.seed, {kSurfaceStream}));
  plan.channel.noise_variance = config.surface.noise_variance;
  plan.channel.averaging_samples = config.surface.averaging_samples;
  plan.greedy = ris::greedy_optimize(grid, plan.channel);
  plan.setup.grid = grid;
  plan.setup.element_gains = plan.channel.element_gains();
  plan.setup.max_gain = config.surface.max_gain;
  return plan;
}

io::Dataset generate_dataset(const io::RunConfig& config, const SurfacePlan* plan) {
  const auto names = config.dataset.class_names();
  std::vector<channel::ActivityProfile> profiles;
  for (const auto& n : names) profiles.push_back(channel::default_profile(n));

  channel::DatasetRequest request;
  request.samples_per_class = config.dataset.samples_per_class;
  request.seed = derive_seed(config.seed, {kDatasetStream});
  if (plan != nullptr) {
    request.with_ris = true;
    request.config = plan->greedy.config;
    request.surface = plan->setup;
  }
  const auto frames =
      channel::generate_activity_dataset(profiles, io::build_scene_template(config), request);
  return io::dataset_from_frames(frames, names);
}

std::vector<dsp::FeatureStream> filtered_streams(const io::Dataset& complex,
                                                 const io::PreprocessSpec& spec) {
  require(complex.header.kind == io::PayloadKind::complex_iq, ErrorKind::dimension,
          "preprocessing expects a complex CSI container");
  const auto frames = io::frames_from_dataset(complex);
  dsp::FilterSpec filter;
  filter.order = spec.filter_order;
  filter.cutoff_hz = spec.cutoff_hz;
  filter.sample_rate_hz = complex.header.sample_rate;

  std::vector<dsp::FeatureStream> streams(frames.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < frames.size(); ++i) {
    RealMatrix amp = dsp::amplitude(frames[i]);  // [freq x time]
    if (spec.filter) amp = dsp::lowpass_filter_rows(amp, filter);
    RealMatrix tc(amp.cols(), amp.rows());
    for (std::size_t f = 0; f < amp.rows(); ++f)
      for (std::size_t t = 0; t < amp.cols(); ++t) tc(t, f) = amp(f, t);
    streams[i] = {std::move(tc), frames[i].label.value_or(-1)};
  }
  return streams;
}

Features preprocess(const io::Dataset& complex, const io::RunConfig& config) {
  const auto& spec = config.preprocess;
  const auto streams = filtered_streams(complex, spec);
  const std::size_t per_record =
      dsp::segment_count(complex.header.time_samples, spec.window, spec.stride);
  require(per_record > 0, ErrorKind::length, "window longer than the recordings");

  Features out;
  out.class_names = complex.header.class_names;
  out.sample_rate = complex.header.sample_rate;
  for (const auto& s : streams) {
    const auto seg = dsp::segment(s, spec.window, spec.stride);
    if (out.tensor.segments == 0)
      out.tensor = seg;
    else
      dsp::append_segments(out.tensor, seg);
  }

  const auto record_labels = complex.labels();
  const model::Split by_record =
      model::stratified_split(record_labels, out.class_names.size(),
                              derive_seed(config.seed, {kSplitStream}),
                              config.train.train_fraction, config.train.val_fraction);
  auto expand = [&](const std::vector<std::size_t>& records) {
    std::vector<std::size_t> segs;
    for (std::size_t r : records)
      for (std::size_t k = 0; k < per_record; ++k) segs.push_back(r * per_record + k);
    return segs;
  };
  out.split = {expand(by_record.train), expand(by_record.val), expand(by_record.test)};

  out.stats = dsp::fit_normalization(out.tensor, spec.normalization, out.split.train);
  out.tensor = dsp::apply_normalization(out.tensor, out.stats);
  return out;
}

nlohmann::json Features::meta() const {
  return {{"normalization", stats.to_json()},
          {"split", split.to_json()},
          {"class_names", class_names},
          {"segments", tensor.segments},
          {"time_steps", tensor.time_steps},
          {"channels", tensor.channels}};
}

TrainOutcome train_and_evaluate(const Features& features, const io::RunConfig& config,
                                const model::EpochCallback& on_epoch,
                                std::optional<model::HiMamba>* model_out) {
  require(!features.split.test.empty(), ErrorKind::configuration,
          "the test split is empty; raise dataset.samples_per_class");
  model::HiMamba net(config.model, derive_seed(config.seed, {kModelStream}));
  model::TrainConfig tc = config.train.config;
  tc.seed = derive_seed(config.seed, {kTrainStream});
  TrainOutcome outcome;
  outcome.report = model::train(net, features.tensor, features.split, tc, on_epoch);
  outcome.test = model::evaluate(net, features.tensor, features.split.test);
  if (model_out != nullptr) model_out->emplace(std::move(net));
  return outcome;
}

}  // namespace thruwall::cli
