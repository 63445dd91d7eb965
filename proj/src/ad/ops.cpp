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

#include "thruwall/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "thruwall/common/error.hpp"
#include "thruwall/kernels/dense.hpp"
#include "thruwall/ssm/discretize.hpp"

namespace thruwall::ad {

namespace {

void same_tape(Var a, Var b) {
  require(a.tape != nullptr && a.tape == b.tape, ErrorKind::invalid_argument,
          "operands live on different tapes");
}

void same_shape(Var a, Var b, const char* op) {
  require(a.shape() == b.shape(), ErrorKind::dimension,
          std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
              shape_string(b.shape()) + " differ");
}

std::size_t last_dim(Var x) {
  require(!x.shape().empty(), ErrorKind::dimension, "op needs at least one dimension");
  return x.shape().back();
}

template <typename F, typename D>
Var unary(Var x, F f, D dfdx) {
  const auto& xv = x.value();
  std::vector<double> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xv[i]);
  const std::size_t xi = x.id;
  return x.tape->record(x.shape(), std::move(y), {xi}, [xi, dfdx](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    const auto& xv = t.value(xi);
    const auto& yv = t.value(self);
    auto& gx = t.grad(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfdx(xv[i], yv[i]);
  });
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var linear(Var x, Var w, std::optional<Var> b) {
  same_tape(x, w);
  require(w.shape().size() == 2, ErrorKind::dimension, "linear weight must be 2-D");
  const std::size_t in = w.shape()[0], out = w.shape()[1];
  require(last_dim(x) == in, ErrorKind::dimension,
          "linear: input " + shape_string(x.shape()) + " vs weight " + shape_string(w.shape()));
  if (b) {
    same_tape(x, *b);
    require(b->shape() == Shape{out}, ErrorKind::dimension, "linear bias must be [out]");
  }
  const std::size_t rows = x.size() / in;
  Shape shape = x.shape();
  shape.back() = out;
  std::vector<double> y(rows * out);
  const std::span<const double> bias = b ? b->value() : std::span<const double>{};
  kernels::affine_forward(rows, in, out, x.value(), w.value(), bias, y);

  const std::size_t xi = x.id, wi = w.id;
  const std::optional<std::size_t> bi = b ? std::optional(b->id) : std::nullopt;
  std::vector<std::size_t> inputs{xi, wi};
  if (bi) inputs.push_back(*bi);
  return x.tape->record(std::move(shape), std::move(y), std::move(inputs),
                        [=](Tape& t, std::size_t self) {
                          const auto& g = t.grad(self);
                          if (t.requires_grad(xi))
                            kernels::affine_grad_input(rows, in, out, g, t.value(wi), t.grad(xi));
                          if (t.requires_grad(wi))
                            kernels::affine_grad_weight(rows, in, out, t.value(xi), g, t.grad(wi));
                          if (bi && t.requires_grad(*bi))
                            kernels::affine_grad_bias(rows, out, g, t.grad(*bi));
                        });
}

Var add(Var a, Var b) {
  same_tape(a, b);
  same_shape(a, b, "add");
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] + b.value()[i];
  const std::size_t ai = a.id, bi = b.id;
  return a.tape->record(a.shape(), std::move(y), {ai, bi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    for (std::size_t id : {ai, bi}) {
      if (!t.requires_grad(id)) continue;
      auto& gx = t.grad(id);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
  });
}

Var mul(Var a, Var b) {
  same_tape(a, b);
  same_shape(a, b, "mul");
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] * b.value()[i];
  const std::size_t ai = a.id, bi = b.id;
  return a.tape->record(a.shape(), std::move(y), {ai, bi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ai)) {
      const auto& bv = t.value(bi);
      auto& ga = t.grad(ai);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(bi)) {
      const auto& av = t.value(ai);
      auto& gb = t.grad(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var add_trailing(Var x, Var y) {
  same_tape(x, y);
  const auto& xs = x.shape();
  const auto& ys = y.shape();
  require(ys.size() <= xs.size() && std::equal(ys.rbegin(), ys.rend(), xs.rbegin()),
          ErrorKind::dimension,
          "add_trailing: " + shape_string(ys) + " is not a suffix of " + shape_string(xs));
  const std::size_t inner = y.size(), outer = x.size() / inner;
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i)
      out[o * inner + i] = x.value()[o * inner + i] + y.value()[i];
  const std::size_t xi = x.id, yi = y.id;
  return x.tape->record(xs, std::move(out), {xi, yi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(xi)) {
      auto& gx = t.grad(xi);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (t.requires_grad(yi)) {
      auto& gy = t.grad(yi);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) gy[i] += g[o * inner + i];
    }
  });
}

Var mul_rows(Var x, Var s) {
  same_tape(x, s);
  const std::size_t d = last_dim(x), rows = x.size() / d;
  Shape expect = x.shape();
  expect.back() = 1;
  require(s.shape() == expect, ErrorKind::dimension,
          "mul_rows: scale must be " + shape_string(expect));
  std::vector<double> y(x.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < d; ++j) y[r * d + j] = x.value()[r * d + j] * s.value()[r];
  const std::size_t xi = x.id, si = s.id;
  return x.tape->record(x.shape(), std::move(y), {xi, si}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(xi)) {
      const auto& sv = t.value(si);
      auto& gx = t.grad(xi);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += g[r * d + j] * sv[r];
    }
    if (t.requires_grad(si)) {
      const auto& xv = t.value(xi);
      auto& gs = t.grad(si);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += g[r * d + j] * xv[r * d + j];
        gs[r] += acc;
      }
    }
  });
}

Var scale(Var x, Var s) {
  same_tape(x, s);
  require(s.size() == 1, ErrorKind::dimension, "scale factor must hold one element");
  const double sv = s.value()[0];
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.value()[i] * sv;
  const std::size_t xi = x.id, si = s.id;
  return x.tape->record(x.shape(), std::move(y), {xi, si}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    const auto& xv = t.value(xi);
    if (t.requires_grad(xi)) {
      const double s0 = t.value(si)[0];
      auto& gx = t.grad(xi);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * s0;
    }
    if (t.requires_grad(si)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
      t.grad(si)[0] += acc;
    }
  });
}

Var silu(Var x) {
  return unary(
      x, [](double v) { return v * sigmoid(v); },
      [](double v, double) {
        const double s = sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
      });
}

Var softplus(Var x, double floor) {
  return unary(
      x,
      [floor](double v) { return (v > 30.0 ? v : std::log1p(std::exp(v))) + floor; },
      [](double v, double) { return sigmoid(v); });
}

Var neg_exp(Var x) {
  return unary(
      x, [](double v) { return -std::exp(v); }, [](double, double y) { return y; });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  same_tape(x, gamma);
  same_tape(x, beta);
  const std::size_t d = last_dim(x), rows = x.size() / d;
  require(gamma.shape() == Shape{d} && beta.shape() == Shape{d}, ErrorKind::dimension,
          "layer_norm affine parameters must be [" + std::to_string(d) + "]");
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto rstd = std::make_shared<std::vector<double>>(rows);
  std::vector<double> y(x.size());
  const auto xv = x.value();
  const auto gv = gamma.value();
  const auto bv = beta.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xv[r * d + j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = xv[r * d + j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (xv[r * d + j] - mean) * rs;
      (*xhat)[r * d + j] = h;
      y[r * d + j] = gv[j] * h + bv[j];
    }
  }
  const std::size_t xi = x.id, gi = gamma.id, bi = beta.id;
  return x.tape->record(x.shape(), std::move(y), {xi, gi, bi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    const auto& gam = t.value(gi);
    if (t.requires_grad(gi)) {
      auto& gg = t.grad(gi);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) gg[j] += g[r * d + j] * (*xhat)[r * d + j];
    }
    if (t.requires_grad(bi)) {
      auto& gb = t.grad(bi);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) gb[j] += g[r * d + j];
    }
    if (t.requires_grad(xi)) {
      auto& gx = t.grad(xi);
      for (std::size_t r = 0; r < rows; ++r) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double gh = g[r * d + j] * gam[j];
          m1 += gh;
          m2 += gh * (*xhat)[r * d + j];
        }
        m1 /= static_cast<double>(d);
        m2 /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
          const double gh = g[r * d + j] * gam[j];
          gx[r * d + j] += (*rstd)[r] * (gh - m1 - (*xhat)[r * d + j] * m2);
        }
      }
    }
  });
}

Var causal_depthwise_conv(Var x, Var w, Var b) {
  same_tape(x, w);
  same_tape(x, b);
  require(x.shape().size() == 3, ErrorKind::dimension, "causal conv input must be [B, L, C]");
  const std::size_t B = x.shape()[0], L = x.shape()[1], C = x.shape()[2];
  require(w.shape().size() == 2 && w.shape()[0] == C && w.shape()[1] >= 1, ErrorKind::dimension,
          "causal conv weight must be [C, K]");
  require(b.shape() == Shape{C}, ErrorKind::dimension, "causal conv bias must be [C]");
  const std::size_t K = w.shape()[1];
  const auto xv = x.value();
  const auto wv = w.value();
  const auto bv = b.value();
  std::vector<double> y(x.size());
  for (std::size_t bb = 0; bb < B; ++bb)
    for (std::size_t t = 0; t < L; ++t)
      for (std::size_t c = 0; c < C; ++c) {
        double acc = bv[c];
        for (std::size_t j = 0; j < K; ++j) {
          const std::size_t back = K - 1 - j;
          if (back > t) continue;
          acc += wv[c * K + j] * xv[(bb * L + t - back) * C + c];
        }
        y[(bb * L + t) * C + c] = acc;
      }
  const std::size_t xi = x.id, wi = w.id, bi = b.id;
  return x.tape->record(x.shape(), std::move(y), {xi, wi, bi}, [=](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& xv = tp.value(xi);
    const auto& wv = tp.value(wi);
    const bool need_x = tp.requires_grad(xi), need_w = tp.requires_grad(wi);
    std::vector<double>* gx = need_x ? &tp.grad(xi) : nullptr;
    std::vector<double>* gw = need_w ? &tp.grad(wi) : nullptr;
    for (std::size_t bb = 0; bb < B; ++bb)
      for (std::size_t t = 0; t < L; ++t)
        for (std::size_t c = 0; c < C; ++c) {
          const double gy = g[(bb * L + t) * C + c];
          for (std::size_t j = 0; j < K; ++j) {
            const std::size_t back = K - 1 - j;
            if (back > t) continue;
            const std::size_t src = (bb * L + t - back) * C + c;
            if (gx) (*gx)[src] += wv[c * K + j] * gy;
            if (gw) (*gw)[c * K + j] += xv[src] * gy;
          }
        }
    if (tp.requires_grad(bi)) {
      auto& gb = tp.grad(bi);
      for (std::size_t r = 0; r < B * L; ++r)
        for (std::size_t c = 0; c < C; ++c) gb[c] += g[r * C + c];
    }
  });
}

Var mean_time(Var x) {
  require(x.shape().size() == 3, ErrorKind::dimension, "mean_time input must be [B, L, D]");
  const std::size_t B = x.shape()[0], L = x.shape()[1], D = x.shape()[2];
  require(L >= 1, ErrorKind::dimension, "mean over an empty axis");
  std::vector<double> y(B * D, 0.0);
  const auto xv = x.value();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < L; ++t)
      for (std::size_t d = 0; d < D; ++d) y[b * D + d] += xv[(b * L + t) * D + d];
  for (double& v : y) v /= static_cast<double>(L);
  const std::size_t xi = x.id;
  return x.tape->record({B, D}, std::move(y), {xi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(xi);
    const double inv = 1.0 / static_cast<double>(L);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t d = 0; d < D; ++d) gx[(b * L + l) * D + d] += g[b * D + d] * inv;
  });
}

Var transpose_last2(Var x) {
  require(x.shape().size() == 3, ErrorKind::dimension, "transpose input must be [B, L, M]");
  const std::size_t B = x.shape()[0], L = x.shape()[1], M = x.shape()[2];
  std::vector<double> y(x.size());
  const auto xv = x.value();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t m = 0; m < M; ++m) y[(b * M + m) * L + l] = xv[(b * L + l) * M + m];
  const std::size_t xi = x.id;
  return x.tape->record({B, M, L}, std::move(y), {xi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(xi);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t m = 0; m < M; ++m) gx[(b * L + l) * M + m] += g[(b * M + m) * L + l];
  });
}

Var concat_last(Var a, Var b) {
  same_tape(a, b);
  const std::size_t da = last_dim(a), db = last_dim(b);
  Shape lead_a(a.shape().begin(), a.shape().end() - 1);
  Shape lead_b(b.shape().begin(), b.shape().end() - 1);
  require(lead_a == lead_b, ErrorKind::dimension, "concat_last: leading dimensions differ");
  const std::size_t rows = a.size() / da, d = da + db;
  std::vector<double> y(rows * d);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(a.value().begin() + r * da, da, y.begin() + r * d);
    std::copy_n(b.value().begin() + r * db, db, y.begin() + r * d + da);
  }
  Shape shape = a.shape();
  shape.back() = d;
  const std::size_t ai = a.id, bi = b.id;
  return a.tape->record(std::move(shape), std::move(y), {ai, bi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ai)) {
      auto& ga = t.grad(ai);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < da; ++j) ga[r * da + j] += g[r * d + j];
    }
    if (t.requires_grad(bi)) {
      auto& gb = t.grad(bi);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < db; ++j) gb[r * db + j] += g[r * d + da + j];
    }
  });
}

Var slice_last(Var x, std::size_t start, std::size_t length) {
  const std::size_t d = last_dim(x);
  require(length >= 1 && start + length <= d, ErrorKind::dimension, "slice_last out of range");
  const std::size_t rows = x.size() / d;
  std::vector<double> y(rows * length);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(x.value().begin() + r * d + start, length, y.begin() + r * length);
  Shape shape = x.shape();
  shape.back() = length;
  const std::size_t xi = x.id;
  return x.tape->record(std::move(shape), std::move(y), {xi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(xi);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < length; ++j) gx[r * d + start + j] += g[r * length + j];
  });
}

Var softmax_last(Var x) {
  const std::size_t d = last_dim(x), rows = x.size() / d;
  std::vector<double> y(x.size());
  const auto xv = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const double m = *std::max_element(xv.begin() + r * d, xv.begin() + (r + 1) * d);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += (y[r * d + j] = std::exp(xv[r * d + j] - m));
    for (std::size_t j = 0; j < d; ++j) y[r * d + j] /= s;
  }
  const std::size_t xi = x.id;
  return x.tape->record(x.shape(), std::move(y), {xi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    const auto& yv = t.value(self);
    auto& gx = t.grad(xi);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += g[r * d + j] * yv[r * d + j];
      for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += yv[r * d + j] * (g[r * d + j] - dot);
    }
  });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  require(logits.shape().size() == 2, ErrorKind::dimension, "logits must be [B, C]");
  const std::size_t B = logits.shape()[0], C = logits.shape()[1];
  require(labels.size() == B && B >= 1, ErrorKind::dimension, "one label per logit row required");
  auto probs = std::make_shared<std::vector<double>>(B * C);
  auto lab = std::make_shared<std::vector<int>>(labels.begin(), labels.end());
  const auto z = logits.value();
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const int y = labels[b];
    require(y >= 0 && static_cast<std::size_t>(y) < C, ErrorKind::invalid_argument,
            "label out of range");
    const double m = *std::max_element(z.begin() + b * C, z.begin() + (b + 1) * C);
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) s += ((*probs)[b * C + c] = std::exp(z[b * C + c] - m));
    for (std::size_t c = 0; c < C; ++c) (*probs)[b * C + c] /= s;
    loss += (m + std::log(s)) - z[b * C + y];
  }
  loss /= static_cast<double>(B);
  const std::size_t li = logits.id;
  return logits.tape->record({1}, {loss}, {li}, [=](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0] / static_cast<double>(B);
    auto& gz = t.grad(li);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < C; ++c) {
        const double onehot = static_cast<int>(c) == (*lab)[b] ? 1.0 : 0.0;
        gz[b * C + c] += g * ((*probs)[b * C + c] - onehot);
      }
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value()) s += v;
  const std::size_t xi = x.id;
  return x.tape->record({1}, {s}, {xi}, [=](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (double& v : t.grad(xi)) v += g;
  });
}

Var dropout(Var x, double rate, bool training, std::uint64_t seed) {
  require(rate >= 0.0 && rate < 1.0, ErrorKind::invalid_argument, "dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) return x;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x.size());
  const double s = 1.0 / (1.0 - rate);
  for (double& m : *mask) m = keep(rng) ? s : 0.0;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.value()[i] * (*mask)[i];
  const std::size_t xi = x.id;
  return x.tape->record(x.shape(), std::move(y), {xi}, [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*mask)[i];
  });
}

Var selective_scan(Var u, Var delta, Var A, Var Bm, Var Cm, kernels::ScanMode mode,
                   std::size_t serial_threshold) {
  for (Var v : {delta, A, Bm, Cm}) same_tape(u, v);
  require(u.shape().size() == 3, ErrorKind::dimension, "scan input must be [B, L, E]");
  const std::size_t B = u.shape()[0], L = u.shape()[1], E = u.shape()[2];
  require(delta.shape() == u.shape(), ErrorKind::dimension, "delta must match the scan input");
  require(A.shape().size() == 2 && A.shape()[0] == E, ErrorKind::dimension, "A must be [E, N]");
  const std::size_t N = A.shape()[1];
  require(Bm.shape() == Shape{B, L, N} && Cm.shape() == Shape{B, L, N}, ErrorKind::dimension,
          "B and C must be [B, L, N]");

  // Saved for backward, laid out [B, E, N, L]: decay a = exp(z), phi1(z) and
  // the state h, where z = delta * A.
  const std::size_t slab = E * N * L;
  auto decay = std::make_shared<std::vector<double>>(B * slab);
  auto phis = std::make_shared<std::vector<double>>(B * slab);
  auto state = std::make_shared<std::vector<double>>(B * slab);
  std::vector<double> y(B * L * E, 0.0);

  const auto uv = u.value();
  const auto dv = delta.value();
  const auto av = A.value();
  const auto bv = Bm.value();
  const auto cv = Cm.value();

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bs = 0; bs < static_cast<std::ptrdiff_t>(B); ++bs) {
    const std::size_t b = static_cast<std::size_t>(bs);
    std::vector<double> drive(L);
    for (std::size_t e = 0; e < E; ++e)
      for (std::size_t n = 0; n < N; ++n) {
        const std::size_t off = b * slab + (e * N + n) * L;
        double* a = decay->data() + off;
        double* phi = phis->data() + off;
        double* h = state->data() + off;
        const double an = av[e * N + n];
        for (std::size_t k = 0; k < L; ++k) {
          const std::size_t i = (b * L + k) * E + e;
          const double z = dv[i] * an;
          const double em1 = std::expm1(z);
          a[k] = 1.0 + em1;
          phi[k] = std::abs(z) < 1e-5 ? ssm::expm1_over_x(z) : em1 / z;
          drive[k] = dv[i] * phi[k] * bv[(b * L + k) * N + n] * uv[i];
        }
        kernels::linear_recurrence(mode, {a, L}, drive, {h, L}, serial_threshold);
        for (std::size_t k = 0; k < L; ++k) y[(b * L + k) * E + e] += cv[(b * L + k) * N + n] * h[k];
      }
  }

  const std::size_t ui = u.id, di = delta.id, ai = A.id, bi = Bm.id, ci = Cm.id;
  return u.tape->record(
      u.shape(), std::move(y), {ui, di, ai, bi, ci}, [=](Tape& t, std::size_t self) {
        const auto& gy = t.grad(self);
        const auto& uv = t.value(ui);
        const auto& dv = t.value(di);
        const auto& av = t.value(ai);
        const auto& bv = t.value(bi);
        const auto& cv = t.value(ci);
        auto& gu = t.grad(ui);
        auto& gd = t.grad(di);
        auto& gB = t.grad(bi);
        auto& gC = t.grad(ci);
        // A is shared over the batch: per-batch partials, summed in order below.
        std::vector<double> gA_part(B * E * N, 0.0);

#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t bs = 0; bs < static_cast<std::ptrdiff_t>(B); ++bs) {
          const std::size_t b = static_cast<std::size_t>(bs);
          std::vector<double> c(L), gh(L);
          for (std::size_t e = 0; e < E; ++e)
            for (std::size_t n = 0; n < N; ++n) {
              const std::size_t off = b * slab + (e * N + n) * L;
              const double* a = decay->data() + off;
              const double* phi = phis->data() + off;
              const double* h = state->data() + off;
              const double an = av[e * N + n];
              for (std::size_t k = 0; k < L; ++k)
                c[k] = cv[(b * L + k) * N + n] * gy[(b * L + k) * E + e];
              kernels::reverse_linear_recurrence(mode, {a, L}, c, gh, serial_threshold);
              double gA_acc = 0.0;
              for (std::size_t k = 0; k < L; ++k) {
                const std::size_t i = (b * L + k) * E + e;
                const std::size_t j = (b * L + k) * N + n;
                const double d = dv[i], z = d * an;
                // phi1'(z) = (exp(z) - phi1(z)) / z away from the origin.
                const double dphi =
                    std::abs(z) < 1e-3 ? ssm::expm1_over_x_derivative(z) : (a[k] - phi[k]) / z;
                const double g_drive = gh[k];
                const double g_a = k > 0 ? gh[k] * h[k - 1] : 0.0;
                const double bu = bv[j] * uv[i];
                gd[i] += g_a * an * a[k] + g_drive * a[k] * bu;
                gA_acc += g_a * d * a[k] + g_drive * d * d * dphi * bu;
                gB[j] += g_drive * d * phi[k] * uv[i];
                gu[i] += g_drive * d * phi[k] * bv[j];
                gC[j] += h[k] * gy[i];
              }
              gA_part[(b * E + e) * N + n] = gA_acc;
            }
        }
        if (t.requires_grad(ai)) {
          auto& gA = t.grad(ai);
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t k = 0; k < E * N; ++k) gA[k] += gA_part[b * E * N + k];
        }
      });
}

}  // namespace thruwall::ad
