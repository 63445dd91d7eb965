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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "thruwall/ad/tape.hpp"
#include "thruwall/dsp/features.hpp"
#include "thruwall/model/himamba.hpp"

namespace thruwall::model {

struct Split {
  std::vector<std::size_t> train, val, test;

  nlohmann::json to_json() const;
  static Split from_json(const nlohmann::json& j);
};

/// Per class: shuffle, take round(train_frac * n) for training,
/// round(val_frac * n) for validation, the rest for test.
Split stratified_split(std::span<const int> labels, std::size_t num_classes, std::uint64_t seed,
                       double train_frac = 0.70, double val_frac = 0.15);

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// One bias-corrected update from the accumulated gradients.
  void step(ad::ParameterSet& params);
  std::size_t steps() const noexcept { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  /// Stop after this many epochs without a new best; 0 disables.
  std::size_t patience = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainingReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  double best_val_loss = 0.0;
  std::size_t optimizer_steps = 0;
  bool stopped_early = false;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean cross-entropy with Adam over shuffled mini-batches. After training
/// the parameters are restored to the epoch with the best validation accuracy
/// (ties broken by lower validation loss; training loss when there is no
/// validation split). A non-finite loss aborts with a divergence error.
TrainingReport train(HiMamba& model, const dsp::FeatureTensor& data, const Split& split,
                     const TrainConfig& config, const EpochCallback& on_epoch = {});

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;  // [true][predicted]

struct Metrics {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_accuracy;  // recall per class
  ConfusionMatrix confusion;

  nlohmann::json to_json(std::span<const std::string> class_names = {}) const;
};

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> truth,
                                 std::size_t num_classes);
/// Macro averages; a class never predicted has precision 0, a class never
/// present has recall 0, and F1 is 0 whenever precision + recall is 0.
Metrics metrics_from_confusion(const ConfusionMatrix& cm);

std::vector<int> argmax_rows(std::span<const double> logits, std::size_t num_classes);

struct Prediction {
  std::vector<int> predicted;
  std::vector<int> truth;
  double mean_loss = 0.0;
};

/// Inference over the listed segments in fixed-size chunks.
Prediction predict(HiMamba& model, const dsp::FeatureTensor& data,
                   std::span<const std::size_t> indices, std::size_t chunk = 64);

Metrics evaluate(HiMamba& model, const dsp::FeatureTensor& data,
                 std::span<const std::size_t> indices);

std::string confusion_to_csv(const ConfusionMatrix& cm, std::span<const std::string> class_names);

}  // namespace thruwall::model
