// include/hear/grad/graph.hpp

// Copyright 2026 The HEAR Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hear/grad/tensor.hpp"

namespace hear::grad {

template <typename Real>
class Graph;

/// Handle to a value recorded in a Graph. Cheap to copy.
template <typename Real>
class Var {
 public:
  Var() = default;
  Var(Graph<Real>* graph, std::size_t id) : graph_(graph), id_(id) {}

  std::size_t id() const { return id_; }
  Graph<Real>* graph() const { return graph_; }
  const Tensor<Real>& value() const;
  const Shape& shape() const { return value().shape; }
  std::size_t dim(std::size_t axis) const { return value().shape.at(axis); }

 private:
  Graph<Real>* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Tape of executed ops for reverse-mode differentiation.
///
/// Nodes are appended in execution order, so the tape is already a
/// topological order; backward walks it in reverse exactly once. Every op
/// checks its result for NaN/Inf and throws NumericalError naming the op.
/// Binary elementwise ops broadcast numpy-style (trailing dimensions aligned).
///
/// A Graph belongs to one thread. Parameters bound with parameter() receive
/// their gradients (accumulated into Tensor::grad) when backward() runs.
template <typename Real>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const std::vector<Real>& grad_out)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<Real> constant(Tensor<Real> value);
  Var<Real> input(Tensor<Real> value, bool requires_grad = true);
  Var<Real> parameter(Tensor<Real>& param);

  Var<Real> add(Var<Real> a, Var<Real> b);
  Var<Real> sub(Var<Real> a, Var<Real> b);
  Var<Real> mul(Var<Real> a, Var<Real> b);
  Var<Real> div(Var<Real> a, Var<Real> b);
  Var<Real> scale(Var<Real> a, Real factor);
  Var<Real> add_scalar(Var<Real> a, Real offset);

  Var<Real> exp(Var<Real> a);
  Var<Real> log(Var<Real> a);
  Var<Real> sqrt(Var<Real> a);
  Var<Real> tanh(Var<Real> a);
  // Tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
  Var<Real> gelu(Var<Real> a);

  // 2-D only: [m, k] x [k, n] -> [m, n].
  Var<Real> matmul(Var<Real> a, Var<Real> b);
  Var<Real> transpose(Var<Real> a);
  Var<Real> reshape(Var<Real> a, Shape shape);
  Var<Real> concat(std::span<const Var<Real>> parts, std::size_t axis);
  Var<Real> slice(Var<Real> a, std::size_t axis, std::size_t start, std::size_t length);
  Var<Real> broadcast(Var<Real> a, Shape shape);

  Var<Real> sum(Var<Real> a, std::size_t axis, bool keepdim = false);
  Var<Real> mean(Var<Real> a, std::size_t axis, bool keepdim = false);
  // Population variance (divides by n).
  Var<Real> variance(Var<Real> a, std::size_t axis, bool keepdim = false);
  Var<Real> sum_all(Var<Real> a);
  Var<Real> mean_all(Var<Real> a);

  /// Softmax along `axis`. With a mask (length shape[axis]) masked positions get
  /// exactly zero weight and the rest renormalize; a fully masked row throws.
  Var<Real> softmax(Var<Real> a, std::size_t axis, const Mask* mask = nullptr);
  // (x - mean) / sqrt(var + eps) along axis, no affine terms.
  Var<Real> layer_norm(Var<Real> a, std::size_t axis, Real eps);

  /// Extension point for fused ops (losses). `backward` must accumulate into
  /// each input through grad_buffer().
  Var<Real> record(std::string op, Tensor<Real> value, std::vector<Var<Real>> inputs,
                   BackwardFn backward);

  // Zero-initialized gradient slot of `v`, for use inside backward functions.
  std::vector<Real>& grad_buffer(Var<Real> v);
  bool needs_grad(Var<Real> v) const;

  // Root must have exactly one element. A graph supports one backward pass.
  void backward(Var<Real> root);

  const Tensor<Real>& value(Var<Real> v) const;
  // Gradient of the root w.r.t. v after backward (zeros when v got none).
  std::vector<Real> grad(Var<Real> v) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::string op;
    Tensor<Real> value;  // value.grad doubles as the node's adjoint
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool needs_grad = false;
    Tensor<Real>* param = nullptr;
  };

  Var<Real> push(std::string op, Tensor<Real> value, std::vector<Var<Real>> inputs,
                 BackwardFn backward);
  void check_owner(Var<Real> v) const;
  Var<Real> binary(const char* op, Var<Real> a, Var<Real> b, int kind);

  std::deque<Node> nodes_;  // deque keeps references to earlier values stable
  bool consumed_ = false;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace hear::grad
