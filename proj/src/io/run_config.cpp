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

#include "thruwall/io/run_config.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

#include "thruwall/channel/activity.hpp"
#include "thruwall/common/error.hpp"
#include "thruwall/io/files.hpp"

namespace thruwall::io {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  require(j.is_object(), ErrorKind::configuration, where + " must be a JSON object");
  const std::set<std::string> names(known.begin(), known.end());
  for (const auto& [key, _] : j.items())
    require(names.count(key) != 0, ErrorKind::configuration,
            "unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

ris::ChannelModelKind channel_model_from_string(const std::string& name) {
  for (auto k : {ris::ChannelModelKind::iid_gaussian, ris::ChannelModelKind::aligned})
    if (to_string(k) == name) return k;
  throw Error(ErrorKind::configuration,
              "unknown surface channel_model '" + name + "' (iid_gaussian|aligned)");
}

SceneSpec scene_from_json(const json& j) {
  check_keys(j, {"carrier_hz", "bandwidth_hz", "freq_bins", "sample_rate_hz", "time_samples",
                 "wall", "static_paths", "snr_db", "noise_variance"},
             "scene");
  SceneSpec s;
  read(j, "carrier_hz", s.carrier_hz);
  read(j, "bandwidth_hz", s.bandwidth_hz);
  read(j, "freq_bins", s.freq_bins);
  read(j, "sample_rate_hz", s.sample_rate_hz);
  read(j, "time_samples", s.time_samples);
  if (j.contains("wall")) {
    const json& w = j.at("wall");
    check_keys(w, {"rel_permittivity_real", "conductivity_s_per_m", "thickness_m"}, "scene.wall");
    read(w, "rel_permittivity_real", s.wall.rel_permittivity_real);
    read(w, "conductivity_s_per_m", s.wall.conductivity);
    read(w, "thickness_m", s.wall.thickness);
  }
  if (j.contains("static_paths")) {
    s.static_paths.clear();
    for (const json& p : j.at("static_paths")) {
      check_keys(p, {"amplitude", "phase_rad", "path_length_m"}, "scene.static_paths[]");
      StaticPathSpec sp;
      read(p, "amplitude", sp.amplitude);
      read(p, "phase_rad", sp.phase);
      read(p, "path_length_m", sp.path_length_m);
      s.static_paths.push_back(sp);
    }
  }
  if (j.contains("snr_db") || j.contains("noise_variance")) {
    s.snr_db = optional_number(j, "snr_db");
    s.noise_variance = optional_number(j, "noise_variance");
  }
  return s;
}

json scene_to_json(const SceneSpec& s) {
  json paths = json::array();
  for (const auto& p : s.static_paths)
    paths.push_back(
        {{"amplitude", p.amplitude}, {"phase_rad", p.phase}, {"path_length_m", p.path_length_m}});
  json j = {{"carrier_hz", s.carrier_hz},
            {"bandwidth_hz", s.bandwidth_hz},
            {"freq_bins", s.freq_bins},
            {"sample_rate_hz", s.sample_rate_hz},
            {"time_samples", s.time_samples},
            {"wall",
             {{"rel_permittivity_real", s.wall.rel_permittivity_real},
              {"conductivity_s_per_m", s.wall.conductivity},
              {"thickness_m", s.wall.thickness}}},
            {"static_paths", paths}};
  j["snr_db"] = s.snr_db ? json(*s.snr_db) : json(nullptr);
  j["noise_variance"] = s.noise_variance ? json(*s.noise_variance) : json(nullptr);
  return j;
}

channel::LinkBudget budget_from_json(const json& j) {
  check_keys(j, {"tx_power_dbm", "tx_gain_db", "rx_gain_db", "amp_gain_db", "carrier_hz",
                 "distance_m", "cable_length_m", "cable_loss_db_per_m", "path_loss_exponent",
                 "reference_distance_m", "target_dbm"},
             "link_budget");
  channel::LinkBudget b;
  read(j, "tx_power_dbm", b.tx_power);
  read(j, "tx_gain_db", b.tx_gain);
  read(j, "rx_gain_db", b.rx_gain);
  read(j, "amp_gain_db", b.amp_gain);
  read(j, "carrier_hz", b.carrier_freq);
  read(j, "distance_m", b.distance);
  read(j, "cable_length_m", b.cable_length);
  read(j, "cable_loss_db_per_m", b.cable_loss_rate);
  read(j, "path_loss_exponent", b.path_loss_exponent);
  read(j, "reference_distance_m", b.reference_distance);
  return b;
}

}  // namespace

std::string to_string(ris::ChannelModelKind kind) {
  switch (kind) {
    case ris::ChannelModelKind::iid_gaussian: return "iid_gaussian";
    case ris::ChannelModelKind::aligned: return "aligned";
    case ris::ChannelModelKind::fixed: return "fixed";
  }
  return "?";
}

double SceneSpec::resolved_noise_variance() const {
  validate();
  if (noise_variance) return *noise_variance;
  const double beta = channel::wall_effect(wall, carrier_hz).amplitude_factor;
  const double a0 = static_paths.front().amplitude * beta;
  return a0 * a0 * std::pow(10.0, -*snr_db / 10.0);
}

void SceneSpec::validate() const {
  require(carrier_hz > 0 && bandwidth_hz > 0 && sample_rate_hz > 0, ErrorKind::configuration,
          "scene frequencies must be positive");
  require(freq_bins > 0 && time_samples > 0, ErrorKind::configuration,
          "scene grid sizes must be positive");
  require(!static_paths.empty(), ErrorKind::configuration, "scene needs at least one static path");
  for (const auto& p : static_paths)
    require(p.amplitude >= 0 && p.path_length_m >= 0, ErrorKind::configuration,
            "static path amplitude and length must be non-negative");
  require(snr_db.has_value() != noise_variance.has_value(), ErrorKind::configuration,
          "set exactly one of scene.snr_db and scene.noise_variance");
  require(!noise_variance || *noise_variance >= 0, ErrorKind::configuration,
          "scene.noise_variance must be non-negative");
  wall.validate();
}

std::vector<std::string> DatasetSpec::class_names() const {
  if (!classes.empty()) return classes;
  return {channel::kActivityClasses.begin(), channel::kActivityClasses.end()};
}

void RunConfig::validate() const {
  scene.validate();
  const auto names = dataset.class_names();
  require(dataset.samples_per_class > 0, ErrorKind::configuration,
          "dataset.samples_per_class must be positive");
  for (const auto& n : names)
    require(channel::is_activity_class(n), ErrorKind::configuration,
            "unknown activity class '" + n + "'");
  require(std::set<std::string>(names.begin(), names.end()).size() == names.size(),
          ErrorKind::configuration, "dataset.classes has duplicates");
  require(surface.rows > 0 && surface.cols > 0, ErrorKind::configuration,
          "surface grid must be non-empty");
  require(surface.max_gain > 0, ErrorKind::configuration, "surface.max_gain must be positive");
  require(surface.noise_variance >= 0 && surface.averaging_samples > 0, ErrorKind::configuration,
          "surface noise settings are invalid");
  link_budget.budget.validate();
  require(preprocess.filter_order > 0 && preprocess.cutoff_hz > 0, ErrorKind::configuration,
          "preprocess filter settings must be positive");
  require(preprocess.cutoff_hz < scene.sample_rate_hz / 2, ErrorKind::configuration,
          "preprocess.cutoff_hz must be below the Nyquist rate of the scene");
  require(preprocess.window > 0 && preprocess.stride > 0, ErrorKind::configuration,
          "preprocess window and stride must be positive");
  require(preprocess.window <= scene.time_samples, ErrorKind::configuration,
          "preprocess.window exceeds scene.time_samples");
  model.validate();
  require(model.input_len == preprocess.window, ErrorKind::configuration,
          "model.input_len must equal preprocess.window");
  require(model.input_channels == scene.freq_bins, ErrorKind::configuration,
          "model.input_channels must equal scene.freq_bins");
  require(model.num_classes == names.size(), ErrorKind::configuration,
          "model.num_classes must equal the number of dataset classes");
  train.config.validate();
  require(train.train_fraction > 0 && train.val_fraction >= 0 &&
              train.train_fraction + train.val_fraction <= 1.0,
          ErrorKind::configuration, "train split fractions are invalid");
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, {"seed", "output_dir", "scene", "dataset", "surface", "link_budget", "preprocess",
                 "model", "train"},
             "config");
  RunConfig c;
  try {
    read(j, "seed", c.seed);
    read(j, "output_dir", c.output_dir);
    if (j.contains("scene")) c.scene = scene_from_json(j.at("scene"));
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      check_keys(d, {"samples_per_class", "classes", "with_ris"}, "dataset");
      read(d, "samples_per_class", c.dataset.samples_per_class);
      read(d, "classes", c.dataset.classes);
      read(d, "with_ris", c.dataset.with_ris);
    }
    if (j.contains("surface")) {
      const json& s = j.at("surface");
      check_keys(s, {"rows", "cols", "max_gain", "channel_model", "gain_trials", "noise_variance",
                     "averaging_samples"},
                 "surface");
      read(s, "rows", c.surface.rows);
      read(s, "cols", c.surface.cols);
      read(s, "max_gain", c.surface.max_gain);
      if (s.contains("channel_model"))
        c.surface.channel_model = channel_model_from_string(s.at("channel_model").get<std::string>());
      read(s, "gain_trials", c.surface.gain_trials);
      read(s, "noise_variance", c.surface.noise_variance);
      read(s, "averaging_samples", c.surface.averaging_samples);
    }
    if (j.contains("link_budget")) {
      c.link_budget.budget = budget_from_json(j.at("link_budget"));
      read(j.at("link_budget"), "target_dbm", c.link_budget.target_dbm);
    }
    if (j.contains("preprocess")) {
      const json& p = j.at("preprocess");
      check_keys(p, {"filter", "filter_order", "cutoff_hz", "normalization", "window", "stride"},
                 "preprocess");
      read(p, "filter", c.preprocess.filter);
      read(p, "filter_order", c.preprocess.filter_order);
      read(p, "cutoff_hz", c.preprocess.cutoff_hz);
      if (p.contains("normalization"))
        c.preprocess.normalization =
            dsp::normalization_mode_from_string(p.at("normalization").get<std::string>());
      read(p, "window", c.preprocess.window);
      read(p, "stride", c.preprocess.stride);
    }
    if (j.contains("model")) c.model = model::model_config_from_json(j.at("model"));
    if (j.contains("train")) {
      const json& t = j.at("train");
      check_keys(t, {"learning_rate", "batch_size", "epochs", "patience", "train_fraction",
                     "val_fraction"},
                 "train");
      read(t, "learning_rate", c.train.config.learning_rate);
      read(t, "batch_size", c.train.config.batch_size);
      read(t, "epochs", c.train.config.epochs);
      read(t, "patience", c.train.config.patience);
      read(t, "train_fraction", c.train.train_fraction);
      read(t, "val_fraction", c.train.val_fraction);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::configuration, std::string("config: ") + e.what());
  }
  c.train.config.seed = c.seed;
  c.validate();
  return c;
}

json to_json(const RunConfig& c) {
  const auto& b = c.link_budget.budget;
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["scene"] = scene_to_json(c.scene);
  j["dataset"] = {{"samples_per_class", c.dataset.samples_per_class},
                  {"classes", c.dataset.class_names()},
                  {"with_ris", c.dataset.with_ris}};
  j["surface"] = {{"rows", c.surface.rows},
                  {"cols", c.surface.cols},
                  {"max_gain", c.surface.max_gain},
                  {"channel_model", to_string(c.surface.channel_model)},
                  {"gain_trials", c.surface.gain_trials},
                  {"noise_variance", c.surface.noise_variance},
                  {"averaging_samples", c.surface.averaging_samples}};
  j["link_budget"] = {{"tx_power_dbm", b.tx_power},
                      {"tx_gain_db", b.tx_gain},
                      {"rx_gain_db", b.rx_gain},
                      {"amp_gain_db", b.amp_gain},
                      {"carrier_hz", b.carrier_freq},
                      {"distance_m", b.distance},
                      {"cable_length_m", b.cable_length},
                      {"cable_loss_db_per_m", b.cable_loss_rate},
                      {"path_loss_exponent", b.path_loss_exponent},
                      {"reference_distance_m", b.reference_distance},
                      {"target_dbm", c.link_budget.target_dbm}};
  j["preprocess"] = {{"filter", c.preprocess.filter},
                     {"filter_order", c.preprocess.filter_order},
                     {"cutoff_hz", c.preprocess.cutoff_hz},
                     {"normalization", dsp::to_string(c.preprocess.normalization)},
                     {"window", c.preprocess.window},
                     {"stride", c.preprocess.stride}};
  j["model"] = model::to_json(c.model);
  j["train"] = {{"learning_rate", c.train.config.learning_rate},
                {"batch_size", c.train.config.batch_size},
                {"epochs", c.train.config.epochs},
                {"patience", c.train.config.patience},
                {"train_fraction", c.train.train_fraction},
                {"val_fraction", c.train.val_fraction}};
  return j;
}

std::string config_hash(const RunConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  return hex64(fnv1a64(j.dump()));
}

channel::Scene build_scene_template(const RunConfig& config) {
  const SceneSpec& s = config.scene;
  s.validate();
  channel::Scene scene;
  scene.wall = s.wall;
  scene.wall_effect = channel::wall_effect(s.wall, s.carrier_hz);
  for (const auto& p : s.static_paths)
    scene.paths.push_back(
        channel::PathComponent::fixed(p.amplitude, p.phase, p.path_length_m / channel::kSpeedOfLight));
  scene.freq_grid = channel::uniform_freq_grid(s.carrier_hz, s.bandwidth_hz, s.freq_bins);
  scene.time_grid = channel::uniform_time_grid(s.sample_rate_hz, s.time_samples);
  scene.noise_variance = s.resolved_noise_variance();
  scene.rng_seed = config.seed;
  return scene;
}

json link_budget_report(const RunConfig& config) {
  const channel::LinkBudget& open = config.link_budget.budget;
  const double rate = channel::wall_attenuation_rate(config.scene.wall);
  const double loss = channel::wall_loss_db(config.scene.wall);
  channel::LinkBudget walled = open;
  walled.obstruction_losses.push_back(loss);
  const double received = channel::received_power(walled);
  return {{"received_power_no_wall_dbm", channel::received_power(open)},
          {"wall_attenuation_db_per_m", rate},
          {"wall_thickness_m", config.scene.wall.thickness},
          {"wall_loss_db", loss},
          {"received_power_dbm", received},
          {"target_dbm", config.link_budget.target_dbm},
          {"closure_error_db", received - config.link_budget.target_dbm},
          {"calibrated_thickness_m",
           channel::calibrate_wall_thickness(open, config.scene.wall, config.link_budget.target_dbm)}};
}

}  // namespace thruwall::io
