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
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "thruwall/ad/ops.hpp"
#include "thruwall/ad/tape.hpp"
#include "thruwall/model/config.hpp"

namespace thruwall::model {

enum class Stream { freq, time };

std::string to_string(Stream s);

class HiMamba;

/// One forward (and optionally backward) pass. Owns the tape and binds each
/// parameter to a single tape node on first use. Inference sessions bind
/// parameters as constants so no backward closures are kept.
class Session {
 public:
  Session(HiMamba& model, bool training, std::uint64_t dropout_seed = 0);

  ad::Tape& tape() noexcept { return tape_; }
  bool training() const noexcept { return training_; }
  ad::Var param(const std::string& name);
  ad::Var input(std::span<const double> x, std::size_t batch);
  std::uint64_t next_dropout_seed();

 private:
  HiMamba& model_;
  ad::Tape tape_;
  bool training_;
  std::uint64_t dropout_seed_;
  std::uint64_t dropout_calls_ = 0;
  std::unordered_map<std::string, ad::Var> bound_;
};

struct Embeddings {
  std::optional<ad::Var> freq;  // [B, L_f, D]
  std::optional<ad::Var> time;  // [B, L, D]
};

struct Fusion {
  ad::Var fused;                  // [B, head_input_dim]
  std::optional<ad::Var> weights; // [B, 2] (f_f, f_t); full variant only
};

struct ForwardResult {
  ad::Var logits;  // [B, n_c]
  std::optional<ad::Var> pooled_freq;
  std::optional<ad::Var> pooled_time;
  Fusion fusion;
};

class HiMamba {
 public:
  HiMamba(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  ad::ParameterSet& parameters() noexcept { return params_; }
  const ad::ParameterSet& parameters() const noexcept { return params_; }

  /// x: [B, L, M].
  Embeddings embed(Session& s, ad::Var x);
  ad::Var mamba_block(Session& s, ad::Var r, Stream stream, std::size_t index);
  /// Blocks in order, then mean over the sequence axis: [B, D].
  ad::Var encode_stream(Session& s, ad::Var e, Stream stream);
  Fusion fuse(Session& s, std::optional<ad::Var> pf, std::optional<ad::Var> pt);
  ad::Var classify(Session& s, ad::Var y);
  ForwardResult forward(Session& s, ad::Var x);

  /// Convenience inference over a flat [B, L, M] buffer; returns logits.
  std::vector<double> predict_logits(std::span<const double> x, std::size_t batch);

  std::size_t count_params() const;
  /// Multiply-accumulates for one input sample; independent of batch size.
  std::size_t count_macs() const;

  static std::string block_prefix(Stream stream, std::size_t index);

 private:
  void build(std::uint64_t seed);

  ModelConfig config_;
  ad::ParameterSet params_;
  std::vector<double> sinusoid_;  // [L, D] when positional == sinusoidal
};

/// Closed-form parameter count, kept separate from the traversal so the two
/// can be checked against each other.
std::size_t expected_param_count(const ModelConfig& c);

/// Fixed [L, D] sinusoidal table: sin on even, cos on odd columns.
std::vector<double> sinusoidal_table(std::size_t length, std::size_t dim);

}  // namespace thruwall::model
