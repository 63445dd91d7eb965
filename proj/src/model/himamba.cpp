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

#include "thruwall/model/himamba.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "thruwall/common/error.hpp"
#include "thruwall/common/random.hpp"
#include "thruwall/ssm/scan.hpp"

namespace thruwall::model {

using ad::Var;

namespace {

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

// Portable draws: the standard distributions are implementation-defined.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

std::string to_string(Stream s) { return s == Stream::freq ? "freq" : "time"; }

std::vector<double> sinusoidal_table(std::size_t length, std::size_t dim) {
  std::vector<double> t(length * dim);
  for (std::size_t p = 0; p < length; ++p)
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      const double a = static_cast<double>(p) * rate;
      t[p * dim + i] = (i % 2 == 0) ? std::sin(a) : std::cos(a);
    }
  return t;
}

// Session ------------------------------------------------------------------

Session::Session(HiMamba& model, bool training, std::uint64_t dropout_seed)
    : model_(model), training_(training), dropout_seed_(dropout_seed) {}

Var Session::param(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  auto& p = model_.parameters().get(name);
  Var v = training_ ? tape_.parameter(p) : tape_.constant(p.shape, p.value);
  bound_.emplace(name, v);
  return v;
}

Var Session::input(std::span<const double> x, std::size_t batch) {
  const auto& c = model_.config();
  require(batch >= 1 && x.size() == batch * c.input_len * c.input_channels, ErrorKind::dimension,
          "input must be [B x " + std::to_string(c.input_len) + " x " +
              std::to_string(c.input_channels) + "]");
  return tape_.constant({batch, c.input_len, c.input_channels}, {x.begin(), x.end()});
}

std::uint64_t Session::next_dropout_seed() { return derive_seed(dropout_seed_, {dropout_calls_++}); }

// Construction -------------------------------------------------------------

std::string HiMamba::block_prefix(Stream stream, std::size_t index) {
  return to_string(stream) + ".block" + std::to_string(index) + ".";
}

HiMamba::HiMamba(ModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  if (config_.positional == PositionalEncoding::sinusoidal)
    sinusoid_ = sinusoidal_table(config_.input_len, config_.model_dim);
  build(seed);
}

void HiMamba::build(std::uint64_t seed) {
  const auto& c = config_;
  const std::size_t D = c.model_dim, N = c.state_dim, K = c.conv_kernel_width;

  auto draw_for = [seed](const std::string& name) { return Draw(derive_seed(seed, {name_hash(name)})); };
  auto uniform = [&](const std::string& name, ad::Shape shape, double bound) {
    Draw d = draw_for(name);
    std::vector<double> v(ad::numel(shape));
    for (double& x : v) x = d.uniform(-bound, bound);
    params_.add(name, std::move(shape), std::move(v));
  };
  auto filled = [&](const std::string& name, ad::Shape shape, double value) {
    std::vector<double> v(ad::numel(shape), value);
    params_.add(name, std::move(shape), std::move(v));
  };
  auto linear = [&](const std::string& name, std::size_t in, std::size_t out, bool bias) {
    uniform(name + ".weight", {in, out}, 1.0 / std::sqrt(static_cast<double>(in)));
    if (bias) filled(name + ".bias", {out}, 0.0);
  };

  if (c.uses_freq()) {
    const std::size_t in = c.frequency_axis == FrequencyAxis::time ? c.input_channels : c.input_len;
    linear("embed.freq", in, D, true);
  }
  if (c.uses_time()) {
    linear("embed.time", c.input_channels, D, true);
    if (c.positional == PositionalEncoding::learned) {
      Draw d = draw_for("embed.time.pos");
      std::vector<double> v(c.input_len * D);
      for (double& x : v) x = 0.02 * d.normal();
      params_.add("embed.time.pos", {c.input_len, D}, std::move(v));
    }
  }

  for (Stream s : {Stream::freq, Stream::time}) {
    if ((s == Stream::freq && !c.uses_freq()) || (s == Stream::time && !c.uses_time())) continue;
    for (std::size_t b = 0; b < c.num_blocks; ++b) {
      const std::string p = block_prefix(s, b);
      filled(p + "ln.gamma", {D}, 1.0);
      filled(p + "ln.beta", {D}, 0.0);
      linear(p + "in_proj", D, 2 * D, true);
      uniform(p + "conv.weight", {D, K}, 1.0 / std::sqrt(static_cast<double>(K)));
      filled(p + "conv.bias", {D}, 0.0);
      linear(p + "delta_proj", D, D, false);
      {
        // Step sizes start log-uniform in [1e-3, 1e-1]; bias = softplus^-1(dt).
        Draw d = draw_for(p + "delta_proj.bias");
        std::vector<double> v(D);
        for (double& x : v) {
          const double dt = std::exp(d.uniform(std::log(1e-3), std::log(1e-1)));
          x = dt + std::log(-std::expm1(-dt));
        }
        params_.add(p + "delta_proj.bias", {D}, std::move(v));
      }
      linear(p + "B_proj", D, N, false);
      linear(p + "C_proj", D, N, false);
      {
        std::vector<double> v(D * N);
        for (std::size_t i = 0; i < D; ++i)
          for (std::size_t n = 0; n < N; ++n) v[i * N + n] = std::log(static_cast<double>(n + 1));
        params_.add(p + "A_log", {D, N}, std::move(v));
      }
      linear(p + "out_proj", D, D, true);
      filled(p + "alpha", {1}, 0.0);
    }
  }

  if (c.variant == Variant::full) {
    filled("fusion.ln.gamma", {2 * D}, 1.0);
    filled("fusion.ln.beta", {2 * D}, 0.0);
    linear("fusion.proj", 2 * D, 2, true);
  }
  linear("head.fc1", c.head_input_dim(), D, true);
  linear("head.fc2", D, c.num_classes, true);
}

// Forward ------------------------------------------------------------------

Embeddings HiMamba::embed(Session& s, Var x) {
  const auto& c = config_;
  require(x.shape().size() == 3 && x.shape()[1] == c.input_len && x.shape()[2] == c.input_channels,
          ErrorKind::dimension, "embed expects [B x L x M], got " + ad::shape_string(x.shape()));
  Embeddings e;
  if (c.uses_freq()) {
    Var src = c.frequency_axis == FrequencyAxis::time ? x : ad::transpose_last2(x);
    e.freq = ad::linear(src, s.param("embed.freq.weight"), s.param("embed.freq.bias"));
  }
  if (c.uses_time()) {
    Var t = ad::silu(ad::linear(x, s.param("embed.time.weight"), s.param("embed.time.bias")));
    Var pos = c.positional == PositionalEncoding::learned
                  ? s.param("embed.time.pos")
                  : s.tape().constant({c.input_len, c.model_dim}, sinusoid_);
    e.time = ad::add_trailing(t, pos);
  }
  return e;
}

Var HiMamba::mamba_block(Session& s, Var r, Stream stream, std::size_t index) {
  const std::size_t D = config_.model_dim;
  const std::string p = block_prefix(stream, index);
  Var z = ad::layer_norm(r, s.param(p + "ln.gamma"), s.param(p + "ln.beta"));
  Var proj = ad::linear(z, s.param(p + "in_proj.weight"), s.param(p + "in_proj.bias"));
  Var l1 = ad::slice_last(proj, 0, D);
  Var l2 = ad::slice_last(proj, D, D);

  Var u = ad::silu(ad::causal_depthwise_conv(l1, s.param(p + "conv.weight"), s.param(p + "conv.bias")));
  Var delta = ad::softplus(
      ad::linear(u, s.param(p + "delta_proj.weight"), s.param(p + "delta_proj.bias")),
      ssm::kDeltaFloor);
  Var Bm = ad::linear(u, s.param(p + "B_proj.weight"));
  Var Cm = ad::linear(u, s.param(p + "C_proj.weight"));
  Var A = ad::neg_exp(s.param(p + "A_log"));
  Var h1 = ad::selective_scan(u, delta, A, Bm, Cm, config_.scan_mode);
  Var h2 = ad::silu(l2);

  Var f = ad::linear(ad::mul(h1, h2), s.param(p + "out_proj.weight"), s.param(p + "out_proj.bias"));
  f = ad::dropout(f, config_.dropout, s.training(), s.next_dropout_seed());
  return ad::add(ad::scale(f, s.param(p + "alpha")), r);
}

Var HiMamba::encode_stream(Session& s, Var e, Stream stream) {
  Var r = e;
  for (std::size_t b = 0; b < config_.num_blocks; ++b) r = mamba_block(s, r, stream, b);
  return ad::mean_time(r);
}

Fusion HiMamba::fuse(Session& s, std::optional<Var> pf, std::optional<Var> pt) {
  Fusion out;
  switch (config_.variant) {
    case Variant::full: {
      require(pf && pt, ErrorKind::invalid_argument, "full fusion needs both streams");
      Var h = ad::layer_norm(ad::concat_last(*pf, *pt), s.param("fusion.ln.gamma"),
                             s.param("fusion.ln.beta"));
      Var w = ad::softmax_last(
          ad::linear(h, s.param("fusion.proj.weight"), s.param("fusion.proj.bias")));
      out.fused = ad::concat_last(ad::mul_rows(*pf, ad::slice_last(w, 0, 1)),
                                  ad::mul_rows(*pt, ad::slice_last(w, 1, 1)));
      out.weights = w;
      break;
    }
    case Variant::concat_fusion:
      require(pf && pt, ErrorKind::invalid_argument, "concat fusion needs both streams");
      out.fused = ad::concat_last(*pf, *pt);
      break;
    case Variant::freq_only:
      require(pf.has_value(), ErrorKind::invalid_argument, "frequency stream missing");
      out.fused = *pf;
      break;
    case Variant::time_only:
      require(pt.has_value(), ErrorKind::invalid_argument, "temporal stream missing");
      out.fused = *pt;
      break;
  }
  return out;
}

Var HiMamba::classify(Session& s, Var y) {
  Var h = ad::silu(ad::linear(y, s.param("head.fc1.weight"), s.param("head.fc1.bias")));
  return ad::linear(h, s.param("head.fc2.weight"), s.param("head.fc2.bias"));
}

ForwardResult HiMamba::forward(Session& s, Var x) {
  Embeddings e = embed(s, x);
  ForwardResult r;
  if (e.freq) r.pooled_freq = encode_stream(s, *e.freq, Stream::freq);
  if (e.time) r.pooled_time = encode_stream(s, *e.time, Stream::time);
  r.fusion = fuse(s, r.pooled_freq, r.pooled_time);
  r.logits = classify(s, r.fusion.fused);
  return r;
}

std::vector<double> HiMamba::predict_logits(std::span<const double> x, std::size_t batch) {
  Session s(*this, false);
  ForwardResult r = forward(s, s.input(x, batch));
  const auto v = r.logits.value();
  return {v.begin(), v.end()};
}

// Accounting ---------------------------------------------------------------

std::size_t HiMamba::count_params() const { return params_.total_size(); }

std::size_t expected_param_count(const ModelConfig& c) {
  const std::size_t D = c.model_dim, N = c.state_dim, K = c.conv_kernel_width;
  const std::size_t M = c.input_channels, L = c.input_len;
  const std::size_t block = 4 * D * D + 3 * D * N + D * K + 7 * D + 1;
  std::size_t n = 0;
  if (c.uses_freq()) {
    const std::size_t in = c.frequency_axis == FrequencyAxis::time ? M : L;
    n += in * D + D + c.num_blocks * block;
  }
  if (c.uses_time()) {
    n += M * D + D + c.num_blocks * block;
    if (c.positional == PositionalEncoding::learned) n += L * D;
  }
  if (c.variant == Variant::full) n += 8 * D + 2;
  n += c.head_input_dim() * D + D + D * c.num_classes + c.num_classes;
  return n;
}

std::size_t HiMamba::count_macs() const {
  const auto& c = config_;
  const std::size_t D = c.model_dim, N = c.state_dim, K = c.conv_kernel_width;
  const std::size_t M = c.input_channels, L = c.input_len;
  auto block = [&](std::size_t len) {
    return len * (D * 2 * D      // in_proj
                  + D * K        // depthwise conv
                  + D * D        // delta_proj
                  + 2 * D * N    // B_proj, C_proj
                  + N * D        // scan
                  + D * D);      // out_proj
  };
  std::size_t macs = 0;
  if (c.uses_freq()) {
    const std::size_t len = c.freq_seq_len();
    const std::size_t in = c.frequency_axis == FrequencyAxis::time ? M : L;
    macs += len * in * D + c.num_blocks * block(len);
  }
  if (c.uses_time()) macs += L * M * D + c.num_blocks * block(L);
  if (c.variant == Variant::full) macs += 2 * D * 2;
  macs += c.head_input_dim() * D + D * c.num_classes;
  return macs;
}

}  // namespace thruwall::model
