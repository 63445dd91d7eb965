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

#include "thruwall/ad/tape.hpp"

#include <algorithm>
#include <numeric>

#include "thruwall/common/error.hpp"

namespace thruwall::ad {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void Parameter::zero_grad() { grad.assign(value.size(), 0.0); }

Parameter& ParameterSet::add(std::string name, Shape shape, std::vector<double> init) {
  require(!contains(name), ErrorKind::invalid_argument, "duplicate parameter '" + name + "'");
  require(init.size() == numel(shape), ErrorKind::dimension,
          "initial value of '" + name + "' does not match " + shape_string(shape));
  index_[name] = params_.size();
  Parameter& p = params_.emplace_back();
  p.name = std::move(name);
  p.shape = std::move(shape);
  p.value = std::move(init);
  p.zero_grad();
  return p;
}

Parameter& ParameterSet::get(const std::string& name) {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorKind::invalid_argument, "no parameter named '" + name + "'");
  return params_[it->second];
}

const Parameter& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorKind::invalid_argument, "no parameter named '" + name + "'");
  return params_[it->second];
}

std::size_t ParameterSet::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

std::vector<std::vector<double>> ParameterSet::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void ParameterSet::restore(const std::vector<std::vector<double>>& values) {
  require(values.size() == params_.size(), ErrorKind::dimension, "snapshot size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i].size() == params_[i].size(), ErrorKind::dimension, "snapshot shape mismatch");
    params_[i].value = values[i];
  }
}

const Shape& Var::shape() const { return tape->shape(id); }
std::span<const double> Var::value() const { return tape->value(id); }
std::size_t Var::size() const { return tape->value(id).size(); }

double Var::item() const {
  require(size() == 1, ErrorKind::dimension, "item() on a tensor of shape " + shape_string(shape()));
  return tape->value(id)[0];
}

Var Tape::constant(Shape shape, std::vector<double> value) {
  require(value.size() == numel(shape), ErrorKind::dimension,
          "constant does not match " + shape_string(shape));
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.shape = p.shape;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::record(Shape shape, std::vector<double> value, std::vector<std::size_t> inputs,
                 Backward backward) {
  require(value.size() == numel(shape), ErrorKind::dimension,
          "op output does not match " + shape_string(shape));
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                [this](std::size_t i) { return nodes_[i].requires_grad; });
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

std::vector<double>& Tape::grad(std::size_t id) {
  auto& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

GradientReport Tape::backward(Var loss) {
  require(loss.tape == this, ErrorKind::invalid_argument, "loss belongs to another tape");
  require(nodes_[loss.id].value.size() == 1, ErrorKind::dimension,
          "backward needs a scalar loss, got " + shape_string(nodes_[loss.id].shape));
  for (auto& n : nodes_) n.grad.clear();
  grad(loss.id)[0] = 1.0;

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (n.grad.empty() || !n.requires_grad || !n.backward) continue;
    n.backward(*this, i);
  }

  GradientReport report;
  for (auto& n : nodes_) {
    if (!n.param) continue;
    if (n.grad.empty()) {
      report.unreached.push_back(n.param->name);
      continue;
    }
    auto& pg = n.param->grad;
    if (pg.size() != n.grad.size()) pg.assign(n.grad.size(), 0.0);
    for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
  }
  return report;
}

}  // namespace thruwall::ad
