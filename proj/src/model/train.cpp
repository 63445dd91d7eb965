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

#include "thruwall/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "thruwall/ad/ops.hpp"
#include "thruwall/common/error.hpp"
#include "thruwall/common/random.hpp"

namespace thruwall::model {

namespace {

void shuffle(std::vector<std::size_t>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

void check_data(const HiMamba& model, const dsp::FeatureTensor& data) {
  const auto& c = model.config();
  require(data.time_steps == c.input_len && data.channels == c.input_channels,
          ErrorKind::dimension,
          "feature tensor is " + std::to_string(data.time_steps) + "x" +
              std::to_string(data.channels) + ", model expects " + std::to_string(c.input_len) +
              "x" + std::to_string(c.input_channels));
  require(data.labels.size() == data.segments, ErrorKind::dimension, "one label per segment required");
  for (int y : data.labels)
    require(y >= 0 && static_cast<std::size_t>(y) < c.num_classes, ErrorKind::invalid_argument,
            "label " + std::to_string(y) + " outside the model's classes");
}

void gather(const dsp::FeatureTensor& data, std::span<const std::size_t> idx,
            std::vector<double>& x, std::vector<int>& y) {
  const std::size_t per = data.time_steps * data.channels;
  x.resize(idx.size() * per);
  y.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] < data.segments, ErrorKind::invalid_argument, "segment index out of range");
    const auto seg = data.segment(idx[i]);
    std::copy(seg.begin(), seg.end(), x.begin() + i * per);
    y[i] = data.labels[idx[i]];
  }
}

double row_loss(std::span<const double> z, int label) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s) - z[label];
}

}  // namespace

// Split --------------------------------------------------------------------

nlohmann::json Split::to_json() const { return {{"train", train}, {"val", val}, {"test", test}}; }

Split Split::from_json(const nlohmann::json& j) {
  Split s;
  s.train = j.at("train").get<std::vector<std::size_t>>();
  s.val = j.at("val").get<std::vector<std::size_t>>();
  s.test = j.at("test").get<std::vector<std::size_t>>();
  return s;
}

Split stratified_split(std::span<const int> labels, std::size_t num_classes, std::uint64_t seed,
                       double train_frac, double val_frac) {
  require(train_frac > 0.0 && val_frac >= 0.0 && train_frac + val_frac <= 1.0,
          ErrorKind::invalid_argument, "split fractions must be non-negative and sum to <= 1");
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < num_classes,
            ErrorKind::invalid_argument, "label out of range in split");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Split s;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& idx = by_class[c];
    shuffle(idx, derive_seed(seed, {c}));
    const auto n = static_cast<double>(idx.size());
    const auto n_train = std::min(idx.size(), static_cast<std::size_t>(std::lround(train_frac * n)));
    const auto n_val =
        std::min(idx.size() - n_train, static_cast<std::size_t>(std::lround(val_frac * n)));
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + n_train);
    s.val.insert(s.val.end(), idx.begin() + n_train, idx.begin() + n_train + n_val);
    s.test.insert(s.test.end(), idx.begin() + n_train + n_val, idx.end());
  }
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

// Adam ---------------------------------------------------------------------

void Adam::step(ad::ParameterSet& params) {
  if (m_.size() != params.count()) {
    m_.clear();
    v_.clear();
    for (const auto& p : params.all()) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t k = 0;
  for (auto& p : params.all()) {
    auto& m = m_[k];
    auto& v = v_[k];
    ++k;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      p.value[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

// Training -----------------------------------------------------------------

void TrainConfig::validate() const {
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorKind::configuration,
          "learning rate must be finite and >= 0");
  require(batch_size >= 1, ErrorKind::configuration, "batch size must be >= 1");
  require(epochs >= 1, ErrorKind::configuration, "epochs must be >= 1");
}

nlohmann::json TrainingReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : epochs)
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"train_accuracy", e.train_accuracy},
                    {"val_loss", e.val_loss},
                    {"val_accuracy", e.val_accuracy}});
  return {{"epochs", rows},
          {"best_epoch", best_epoch},
          {"best_val_accuracy", best_val_accuracy},
          {"best_val_loss", best_val_loss},
          {"optimizer_steps", optimizer_steps},
          {"stopped_early", stopped_early}};
}

std::string TrainingReport::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
  for (const auto& e : epochs)
    os << e.epoch << ',' << e.train_loss << ',' << e.train_accuracy << ',' << e.val_loss << ','
       << e.val_accuracy << '\n';
  return os.str();
}

TrainingReport train(HiMamba& model, const dsp::FeatureTensor& data, const Split& split,
                     const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  check_data(model, data);
  require(!split.train.empty(), ErrorKind::invalid_argument, "training split is empty");

  auto& params = model.parameters();
  Adam adam(config.learning_rate);
  TrainingReport report;
  std::vector<std::vector<double>> best = params.snapshot();
  bool have_best = false;
  double best_acc = -1.0, best_loss = 0.0;

  std::vector<double> x;
  std::vector<int> y;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order = split.train;
    shuffle(order, derive_seed(config.seed, {0x5eed, epoch}));

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      gather(data, std::span(order).subspan(start, n), x, y);

      params.zero_grad();
      Session s(model, true, derive_seed(config.seed, {0xd0, epoch, start}));
      ForwardResult fr = model.forward(s, s.input(x, n));
      ad::Var loss = ad::cross_entropy(fr.logits, y);
      const double lv = loss.item();
      if (!std::isfinite(lv))
        throw Error(ErrorKind::divergence, "loss became non-finite at epoch " +
                                               std::to_string(epoch) + ", sample offset " +
                                               std::to_string(start));
      s.tape().backward(loss);
      adam.step(params);

      loss_sum += lv * static_cast<double>(n);
      const auto pred = argmax_rows(fr.logits.value(), model.config().num_classes);
      for (std::size_t i = 0; i < n; ++i) correct += pred[i] == y[i];
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    if (!split.val.empty()) {
      const Prediction p = predict(model, data, split.val);
      std::size_t ok = 0;
      for (std::size_t i = 0; i < p.truth.size(); ++i) ok += p.predicted[i] == p.truth[i];
      rec.val_loss = p.mean_loss;
      rec.val_accuracy = static_cast<double>(ok) / static_cast<double>(p.truth.size());
    } else {
      rec.val_loss = rec.train_loss;
      rec.val_accuracy = rec.train_accuracy;
    }
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const bool better = !have_best || rec.val_accuracy > best_acc ||
                        (rec.val_accuracy == best_acc && rec.val_loss < best_loss);
    if (better) {
      have_best = true;
      best_acc = rec.val_accuracy;
      best_loss = rec.val_loss;
      report.best_epoch = epoch;
      best = params.snapshot();
    } else if (config.patience > 0 && epoch - report.best_epoch >= config.patience) {
      report.stopped_early = true;
      break;
    }
  }
  params.restore(best);
  params.zero_grad();
  report.best_val_accuracy = best_acc;
  report.best_val_loss = best_loss;
  report.optimizer_steps = adam.steps();
  return report;
}

// Evaluation ---------------------------------------------------------------

std::vector<int> argmax_rows(std::span<const double> logits, std::size_t num_classes) {
  require(num_classes >= 1 && logits.size() % num_classes == 0, ErrorKind::dimension,
          "logits do not divide into rows");
  std::vector<int> out(logits.size() / num_classes);
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto row = logits.subspan(r * num_classes, num_classes);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

Prediction predict(HiMamba& model, const dsp::FeatureTensor& data,
                   std::span<const std::size_t> indices, std::size_t chunk) {
  check_data(model, data);
  require(!indices.empty(), ErrorKind::invalid_argument, "cannot evaluate an empty split");
  require(chunk >= 1, ErrorKind::invalid_argument, "chunk must be >= 1");
  const std::size_t nc = model.config().num_classes;
  Prediction out;
  double loss = 0.0;
  std::vector<double> x;
  std::vector<int> y;
  for (std::size_t start = 0; start < indices.size(); start += chunk) {
    const std::size_t n = std::min(chunk, indices.size() - start);
    gather(data, indices.subspan(start, n), x, y);
    const auto logits = model.predict_logits(x, n);
    const auto pred = argmax_rows(logits, nc);
    for (std::size_t i = 0; i < n; ++i) {
      loss += row_loss(std::span(logits).subspan(i * nc, nc), y[i]);
      out.predicted.push_back(pred[i]);
      out.truth.push_back(y[i]);
    }
  }
  out.mean_loss = loss / static_cast<double>(indices.size());
  return out;
}

Metrics evaluate(HiMamba& model, const dsp::FeatureTensor& data,
                 std::span<const std::size_t> indices) {
  const Prediction p = predict(model, data, indices);
  return metrics_from_confusion(confusion_matrix(p.predicted, p.truth, model.config().num_classes));
}

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> truth,
                                 std::size_t num_classes) {
  require(predicted.size() == truth.size(), ErrorKind::dimension,
          "prediction and label counts differ");
  ConfusionMatrix cm(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && static_cast<std::size_t>(truth[i]) < num_classes &&
                predicted[i] >= 0 && static_cast<std::size_t>(predicted[i]) < num_classes,
            ErrorKind::invalid_argument, "class id out of range");
    ++cm[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return cm;
}

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
  const std::size_t n = cm.size();
  require(n >= 1, ErrorKind::invalid_argument, "empty confusion matrix");
  std::size_t total = 0, diag = 0;
  std::vector<std::size_t> row(n, 0), col(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    require(cm[i].size() == n, ErrorKind::dimension, "confusion matrix must be square");
    for (std::size_t j = 0; j < n; ++j) {
      total += cm[i][j];
      row[i] += cm[i][j];
      col[j] += cm[i][j];
    }
    diag += cm[i][i];
  }
  require(total > 0, ErrorKind::invalid_argument, "cannot score an empty split");

  Metrics m;
  m.confusion = cm;
  m.accuracy = static_cast<double>(diag) / static_cast<double>(total);
  m.per_class_accuracy.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double tp = static_cast<double>(cm[c][c]);
    const double p = col[c] ? tp / static_cast<double>(col[c]) : 0.0;
    const double r = row[c] ? tp / static_cast<double>(row[c]) : 0.0;
    const double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    m.per_class_accuracy[c] = r;
    m.macro_precision += p;
    m.macro_recall += r;
    m.macro_f1 += f;
  }
  m.macro_precision /= static_cast<double>(n);
  m.macro_recall /= static_cast<double>(n);
  m.macro_f1 /= static_cast<double>(n);
  return m;
}

nlohmann::json Metrics::to_json(std::span<const std::string> class_names) const {
  nlohmann::json j = {{"accuracy", accuracy},
                      {"macro_precision", macro_precision},
                      {"macro_recall", macro_recall},
                      {"macro_f1", macro_f1},
                      {"per_class_accuracy", per_class_accuracy},
                      {"confusion", confusion}};
  if (!class_names.empty())
    j["class_names"] = std::vector<std::string>(class_names.begin(), class_names.end());
  return j;
}

std::string confusion_to_csv(const ConfusionMatrix& cm, std::span<const std::string> class_names) {
  std::ostringstream os;
  auto name = [&](std::size_t i) {
    return i < class_names.size() ? class_names[i] : std::to_string(i);
  };
  os << "true\\predicted";
  for (std::size_t j = 0; j < cm.size(); ++j) os << ',' << name(j);
  os << '\n';
  for (std::size_t i = 0; i < cm.size(); ++i) {
    os << name(i);
    for (std::size_t v : cm[i]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

}  // namespace thruwall::model
