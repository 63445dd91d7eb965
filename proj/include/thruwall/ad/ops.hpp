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

#include "thruwall/ad/tape.hpp"
#include "thruwall/kernels/scan.hpp"

namespace thruwall::ad {

// Differentiable tensor ops. Tensors are row-major; "rows" means the product
// of every dimension except the last.

/// x[..., in] * W[in, out] + b[out]. `b` may be omitted.
Var linear(Var x, Var w, std::optional<Var> b = std::nullopt);

Var add(Var a, Var b);
Var mul(Var a, Var b);
/// x[..., T...] + y[T...]: y broadcast over the leading dimensions of x.
Var add_trailing(Var x, Var y);
/// x[..., D] * s[..., 1]
Var mul_rows(Var x, Var s);
/// x * s for a one-element s.
Var scale(Var x, Var s);

Var silu(Var x);
/// softplus(x) + floor
Var softplus(Var x, double floor = 0.0);
/// -exp(x)
Var neg_exp(Var x);

/// Normalises over the last dimension, then gamma * x_hat + beta.
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

/// x[B, L, C], w[C, K], b[C]: y[b,t,c] = b[c] + sum_j w[c,j] x[b, t-K+1+j, c],
/// zero for negative time.
Var causal_depthwise_conv(Var x, Var w, Var b);

/// x[B, L, D] -> mean over L -> [B, D].
Var mean_time(Var x);
/// [B, L, M] -> [B, M, L]
Var transpose_last2(Var x);

Var concat_last(Var a, Var b);
Var slice_last(Var x, std::size_t start, std::size_t length);
Var softmax_last(Var x);

/// Mean softmax cross-entropy of logits[B, C] against integer labels.
Var cross_entropy(Var logits, std::span<const int> labels);
Var sum(Var x);

/// Inverted dropout. Identity when `rate` is 0 or `training` is false.
Var dropout(Var x, double rate, bool training, std::uint64_t seed);

/// Selective scan over E independent channels with a shared diagonal A per
/// channel:
///   u, delta   [B, L, E]
///   A          [E, N]   (continuous-time, typically negative)
///   Bm, Cm     [B, L, N]
///   y[b,k,e] = sum_n Cm[b,k,n] h[b,k,e,n]
///   h[b,k,e,n] = exp(delta A) h[b,k-1,e,n] + delta phi1(delta A) Bm[b,k,n] u[b,k,e]
/// The backward pass runs the adjoint recurrence in reverse time with the
/// same scan mode. Parameter reductions go through per-batch buffers summed in
/// a fixed order, so gradients do not depend on the thread count.
Var selective_scan(Var u, Var delta, Var A, Var Bm, Var Cm,
                   kernels::ScanMode mode = kernels::ScanMode::parallel,
                   std::size_t serial_threshold = 64);

}  // namespace thruwall::ad
