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

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace thruwall::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// A named trainable array. Values persist across tapes; gradients
/// accumulate into `grad` when a tape that used the parameter runs backward.
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;

  std::size_t size() const noexcept { return value.size(); }
  void zero_grad();
};

/// Ordered parameter collection with stable element addresses.
class ParameterSet {
 public:
  Parameter& add(std::string name, Shape shape, std::vector<double> init);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::deque<Parameter>& all() noexcept { return params_; }
  const std::deque<Parameter>& all() const noexcept { return params_; }
  std::size_t count() const noexcept { return params_.size(); }
  std::size_t total_size() const;

  void zero_grad();
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Shape& shape() const;
  std::span<const double> value() const;
  std::size_t size() const;
  double item() const;
};

struct GradientReport {
  /// Parameters placed on the tape that no gradient path reached.
  std::vector<std::string> unreached;
};

/// Per-invocation gradient tape. Nothing is shared between tapes, so
/// independent forward/backward passes may run on separate threads.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Var constant(Shape shape, std::vector<double> value);
  Var parameter(Parameter& p);

  /// Records an op output. `backward` reads grad(self) and accumulates into
  /// the grads of whichever inputs require them.
  Var record(Shape shape, std::vector<double> value, std::vector<std::size_t> inputs,
             Backward backward);

  const std::vector<double>& value(std::size_t id) const { return nodes_[id].value; }
  const Shape& shape(std::size_t id) const { return nodes_[id].shape; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer, zero-initialised on first access.
  std::vector<double>& grad(std::size_t id);
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable node, then
  /// accumulates into the parameters. `loss` must hold one element.
  GradientReport backward(Var loss);

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<std::size_t> inputs;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace thruwall::ad
