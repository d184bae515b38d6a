// src/grad/graph.cc

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

#include "hear/grad/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "hear/core/error.hpp"

namespace hear::grad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename Real>
Tensor<Real>::Tensor(Shape s, Real fill) : shape(std::move(s)), data(numel(shape), fill) {}

template <typename Real>
Tensor<Real>::Tensor(Shape s, std::vector<Real> values) : shape(std::move(s)), data(std::move(values)) {
  if (data.size() != numel(shape)) {
    throw ValidationError("tensor of shape " + shape_string(shape) + " given " +
                          std::to_string(data.size()) + " values");
  }
}

template <typename Real>
Real Tensor<Real>::item() const {
  if (data.size() != 1) throw ValidationError("item() on tensor of shape " + shape_string(shape));
  return data[0];
}

template <typename Real>
void Tensor<Real>::accumulate_grad(const std::vector<Real>& g) {
  if (grad.empty()) grad.assign(data.size(), Real(0));
  for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
}

template struct Tensor<float>;
template struct Tensor<double>;

namespace {

// Leading/axis/trailing extents for ops that act along one axis.
struct AxisSplit {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis, const char* op) {
  if (axis >= s.size()) {
    throw ValidationError(std::string(op) + ": axis " + std::to_string(axis) +
                          " out of range for shape " + shape_string(s));
  }
  AxisSplit a;
  for (std::size_t i = 0; i < axis; ++i) a.outer *= s[i];
  a.len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) a.inner *= s[i];
  return a;
}

Shape reduced_shape(const Shape& s, std::size_t axis, bool keepdim) {
  Shape out = s;
  if (keepdim) {
    out[axis] = 1;
  } else {
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
  }
  return out;
}

/// Element index maps for a numpy-style broadcast of a and b to `out`.
struct Broadcast {
  Shape out;
  bool same = false;
  std::vector<std::uint32_t> ia, ib;
};

std::vector<std::uint32_t> broadcast_index(const Shape& from, const Shape& out) {
  const std::size_t r = out.size();
  std::vector<std::size_t> stride(r, 0);
  std::size_t s = 1;
  for (std::size_t k = 0; k < from.size(); ++k) {
    const std::size_t axis = r - 1 - k;
    const std::size_t d = from[from.size() - 1 - k];
    stride[axis] = d == 1 ? 0 : s;
    s *= d;
  }
  const std::size_t n = numel(out);
  std::vector<std::uint32_t> idx(n);
  std::vector<std::size_t> counter(r, 0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = static_cast<std::uint32_t>(offset);
    for (std::size_t axis = r; axis-- > 0;) {
      ++counter[axis];
      offset += stride[axis];
      if (counter[axis] < out[axis]) break;
      offset -= stride[axis] * counter[axis];
      counter[axis] = 0;
    }
  }
  return idx;
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r, 1);
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t da = k < a.size() ? a[a.size() - 1 - k] : 1;
    const std::size_t db = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (da != db && da != 1 && db != 1) {
      throw ValidationError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                            shape_string(b));
    }
    out[r - 1 - k] = std::max(da, db);
  }
  return out;
}

std::shared_ptr<const Broadcast> plan_broadcast(const Shape& a, const Shape& b, const char* op) {
  auto plan = std::make_shared<Broadcast>();
  if (a == b) {
    plan->out = a;
    plan->same = true;
    return plan;
  }
  plan->out = broadcast_shape(a, b, op);
  plan->ia = broadcast_index(a, plan->out);
  plan->ib = broadcast_index(b, plan->out);
  return plan;
}

template <typename Real>
void check_finite(const Tensor<Real>& t, const std::string& op) {
  for (Real v : t.data) {
    if (!std::isfinite(v)) throw NumericalError("non-finite result in op '" + op + "'");
  }
}

}  // namespace

template <typename Real>
const Tensor<Real>& Var<Real>::value() const {
  if (!graph_) throw ValidationError("use of an unbound Var");
  return graph_->value(*this);
}

template class Var<float>;
template class Var<double>;

template <typename Real>
void Graph<Real>::check_owner(Var<Real> v) const {
  if (v.graph() != this || v.id() >= nodes_.size()) {
    throw ValidationError("Var does not belong to this graph");
  }
}

template <typename Real>
Var<Real> Graph<Real>::push(std::string op, Tensor<Real> value, std::vector<Var<Real>> inputs,
                            BackwardFn backward) {
  if (consumed_) throw ValidationError("graph already consumed by backward; build a new graph");
  check_finite(value, op);
  Node node;
  node.op = std::move(op);
  node.value = std::move(value);
  node.value.grad.clear();
  for (const auto& in : inputs) {
    check_owner(in);
    node.inputs.push_back(in.id());
    node.needs_grad = node.needs_grad || nodes_[in.id()].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var<Real>(this, nodes_.size() - 1);
}

template <typename Real>
Var<Real> Graph<Real>::record(std::string op, Tensor<Real> value, std::vector<Var<Real>> inputs,
                              BackwardFn backward) {
  return push(std::move(op), std::move(value), std::move(inputs), std::move(backward));
}

template <typename Real>
Var<Real> Graph<Real>::constant(Tensor<Real> value) {
  return push("constant", std::move(value), {}, nullptr);
}

template <typename Real>
Var<Real> Graph<Real>::input(Tensor<Real> value, bool requires_grad) {
  auto v = push("input", std::move(value), {}, nullptr);
  nodes_[v.id()].needs_grad = requires_grad;
  return v;
}

template <typename Real>
Var<Real> Graph<Real>::parameter(Tensor<Real>& param) {
  Tensor<Real> copy(param.shape, param.data);
  auto v = push("parameter", std::move(copy), {}, nullptr);
  nodes_[v.id()].needs_grad = true;
  nodes_[v.id()].param = &param;
  return v;
}

template <typename Real>
const Tensor<Real>& Graph<Real>::value(Var<Real> v) const {
  check_owner(v);
  return nodes_[v.id()].value;
}

template <typename Real>
bool Graph<Real>::needs_grad(Var<Real> v) const {
  check_owner(v);
  return nodes_[v.id()].needs_grad;
}

template <typename Real>
std::vector<Real>& Graph<Real>::grad_buffer(Var<Real> v) {
  check_owner(v);
  auto& t = nodes_[v.id()].value;
  if (t.grad.empty()) t.grad.assign(t.data.size(), Real(0));
  return t.grad;
}

template <typename Real>
std::vector<Real> Graph<Real>::grad(Var<Real> v) const {
  check_owner(v);
  const auto& t = nodes_[v.id()].value;
  return t.grad.empty() ? std::vector<Real>(t.data.size(), Real(0)) : t.grad;
}

template <typename Real>
void Graph<Real>::backward(Var<Real> root) {
  check_owner(root);
  if (consumed_) throw ValidationError("backward called twice on the same graph");
  if (nodes_[root.id()].value.size() != 1) {
    throw ValidationError("backward root must be a scalar, got shape " +
                          shape_string(nodes_[root.id()].value.shape));
  }
  consumed_ = true;
  grad_buffer(root)[0] = Real(1);
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.needs_grad || node.value.grad.empty() || !node.backward) continue;
    node.backward(*this, node.value.grad);
  }
  for (auto& node : nodes_) {
    if (node.param && !node.value.grad.empty()) node.param->accumulate_grad(node.value.grad);
  }
}

// ---------------------------------------------------------------------------
// Elementwise

template <typename Real>
Var<Real> Graph<Real>::binary(const char* op, Var<Real> a, Var<Real> b, int kind) {
  check_owner(a);
  check_owner(b);
  const auto& av = value(a);
  const auto& bv = value(b);
  auto plan = plan_broadcast(av.shape, bv.shape, op);
  Tensor<Real> out(plan->out);
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Real x = av.data[plan->same ? i : plan->ia[i]];
    const Real y = bv.data[plan->same ? i : plan->ib[i]];
    switch (kind) {
      case 0: out.data[i] = x + y; break;
      case 1: out.data[i] = x - y; break;
      case 2: out.data[i] = x * y; break;
      default: out.data[i] = x / y; break;
    }
  }
  return push(op, std::move(out), {a, b}, [a, b, plan, kind](Graph& g, const std::vector<Real>& go) {
    const auto& xa = g.value(a).data;
    const auto& xb = g.value(b).data;
    const std::size_t n = go.size();
    if (g.needs_grad(a)) {
      auto& ga = g.grad_buffer(a);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ja = plan->same ? i : plan->ia[i];
        const std::size_t jb = plan->same ? i : plan->ib[i];
        switch (kind) {
          case 0: case 1: ga[ja] += go[i]; break;
          case 2: ga[ja] += go[i] * xb[jb]; break;
          default: ga[ja] += go[i] / xb[jb]; break;
        }
      }
    }
    if (g.needs_grad(b)) {
      auto& gb = g.grad_buffer(b);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ja = plan->same ? i : plan->ia[i];
        const std::size_t jb = plan->same ? i : plan->ib[i];
        switch (kind) {
          case 0: gb[jb] += go[i]; break;
          case 1: gb[jb] -= go[i]; break;
          case 2: gb[jb] += go[i] * xa[ja]; break;
          default: gb[jb] -= go[i] * xa[ja] / (xb[jb] * xb[jb]); break;
        }
      }
    }
  });
}

template <typename Real>
Var<Real> Graph<Real>::add(Var<Real> a, Var<Real> b) { return binary("add", a, b, 0); }
template <typename Real>
Var<Real> Graph<Real>::sub(Var<Real> a, Var<Real> b) { return binary("sub", a, b, 1); }
template <typename Real>
Var<Real> Graph<Real>::mul(Var<Real> a, Var<Real> b) { return binary("mul", a, b, 2); }
template <typename Real>
Var<Real> Graph<Real>::div(Var<Real> a, Var<Real> b) { return binary("div", a, b, 3); }

template <typename Real>
Var<Real> Graph<Real>::scale(Var<Real> a, Real factor) {
  Tensor<Real> out = value(a);
  for (auto& v : out.data) v *= factor;
  return push("scale", std::move(out), {a}, [a, factor](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += factor * go[i];
  });
}

template <typename Real>
Var<Real> Graph<Real>::add_scalar(Var<Real> a, Real offset) {
  Tensor<Real> out = value(a);
  for (auto& v : out.data) v += offset;
  return push("add_scalar", std::move(out), {a}, [a](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
  });
}

template <typename Real>
Var<Real> Graph<Real>::exp(Var<Real> a) {
  Tensor<Real> out = value(a);
  for (auto& v : out.data) v = std::exp(v);
  auto y = std::make_shared<std::vector<Real>>(out.data);
  return push("exp", std::move(out), {a}, [a, y](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * (*y)[i];
  });
}

template <typename Real>
Var<Real> Graph<Real>::log(Var<Real> a) {
  Tensor<Real> out = value(a);
  for (auto& v : out.data) v = std::log(v);
  return push("log", std::move(out), {a}, [a](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    const auto& x = g.value(a).data;
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] / x[i];
  });
}

template <typename Real>
Var<Real> Graph<Real>::sqrt(Var<Real> a) {
  Tensor<Real> out = value(a);
  for (auto& v : out.data) v = std::sqrt(v);
  auto root = std::make_shared<std::vector<Real>>(out.data);
  return push("sqrt", std::move(out), {a}, [a, root](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * Real(0.5) / (*root)[i];
  });
}

template <typename Real>
Var<Real> Graph<Real>::tanh(Var<Real> a) {
  Tensor<Real> out = value(a);
  for (auto& v : out.data) v = std::tanh(v);
  auto y = std::make_shared<std::vector<Real>>(out.data);
  return push("tanh", std::move(out), {a}, [a, y](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * (Real(1) - (*y)[i] * (*y)[i]);
  });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluK = 0.044715;
}  // namespace

template <typename Real>
Var<Real> Graph<Real>::gelu(Var<Real> a) {
  Tensor<Real> out = value(a);
  for (auto& v : out.data) {
    const Real x = v;
    v = Real(0.5) * x * (Real(1) + std::tanh(Real(kGeluC) * (x + Real(kGeluK) * x * x * x)));
  }
  return push("gelu", std::move(out), {a}, [a](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    const auto& xs = g.value(a).data;
    for (std::size_t i = 0; i < go.size(); ++i) {
      const Real x = xs[i];
      const Real t = std::tanh(Real(kGeluC) * (x + Real(kGeluK) * x * x * x));
      const Real du = Real(kGeluC) * (Real(1) + Real(3 * kGeluK) * x * x);
      ga[i] += go[i] * (Real(0.5) * (Real(1) + t) + Real(0.5) * x * (Real(1) - t * t) * du);
    }
  });
}

// ---------------------------------------------------------------------------
// Linear algebra and layout

template <typename Real>
Var<Real> Graph<Real>::matmul(Var<Real> a, Var<Real> b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.shape[1] != bv.shape[0]) {
    throw ValidationError("matmul: shape mismatch " + shape_string(av.shape) + " x " +
                          shape_string(bv.shape));
  }
  const std::size_t m = av.shape[0], k = av.shape[1], n = bv.shape[1];
  Tensor<Real> out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    Real* crow = out.data.data() + i * n;
    const Real* arow = av.data.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const Real aip = arow[p];
      if (aip == Real(0)) continue;
      const Real* brow = bv.data.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  return push("matmul", std::move(out), {a, b}, [a, b, m, k, n](Graph& g, const std::vector<Real>& go) {
    const auto& A = g.value(a).data;
    const auto& B = g.value(b).data;
    if (g.needs_grad(a)) {
      auto& ga = g.grad_buffer(a);
      for (std::size_t i = 0; i < m; ++i) {
        const Real* grow = go.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const Real* brow = B.data() + p * n;
          Real acc = 0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (g.needs_grad(b)) {
      auto& gb = g.grad_buffer(b);
      for (std::size_t i = 0; i < m; ++i) {
        const Real* grow = go.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const Real aip = A[i * k + p];
          if (aip == Real(0)) continue;
          Real* gbrow = gb.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

template <typename Real>
Var<Real> Graph<Real>::transpose(Var<Real> a) {
  const auto& av = value(a);
  if (av.rank() != 2) throw ValidationError("transpose: expected rank 2, got " + shape_string(av.shape));
  const std::size_t r = av.shape[0], c = av.shape[1];
  Tensor<Real> out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.data[j * r + i] = av.data[i * c + j];
  return push("transpose", std::move(out), {a}, [a, r, c](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += go[j * r + i];
  });
}

template <typename Real>
Var<Real> Graph<Real>::reshape(Var<Real> a, Shape shape) {
  const auto& av = value(a);
  if (numel(shape) != av.size()) {
    throw ValidationError("reshape: " + shape_string(av.shape) + " to " + shape_string(shape));
  }
  Tensor<Real> out(std::move(shape), av.data);
  return push("reshape", std::move(out), {a}, [a](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
  });
}

template <typename Real>
Var<Real> Graph<Real>::concat(std::span<const Var<Real>> parts, std::size_t axis) {
  if (parts.empty()) throw ValidationError("concat: no inputs");
  const Shape& first = value(parts[0]).shape;
  if (axis >= first.size()) throw ValidationError("concat: axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> lens;
  for (const auto& p : parts) {
    const Shape& s = value(p).shape;
    if (s.size() != first.size()) throw ValidationError("concat: rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) {
        throw ValidationError("concat: shape mismatch " + shape_string(first) + " vs " + shape_string(s));
      }
    }
    lens.push_back(s[axis]);
    out_shape[axis] += s[axis];
  }
  const AxisSplit sp = split_axis(out_shape, axis, "concat");
  Tensor<Real> out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& src = value(parts[k]).data;
    const std::size_t block = lens[k] * sp.inner;
    for (std::size_t o = 0; o < sp.outer; ++o) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * block), block,
                  out.data.begin() + static_cast<std::ptrdiff_t>(o * sp.len * sp.inner + offset * sp.inner));
    }
    offset += lens[k];
  }
  std::vector<Var<Real>> inputs(parts.begin(), parts.end());
  return push("concat", std::move(out), inputs, [inputs, lens, sp](Graph& g, const std::vector<Real>& go) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const std::size_t block = lens[k] * sp.inner;
      if (g.needs_grad(inputs[k])) {
        auto& gk = g.grad_buffer(inputs[k]);
        for (std::size_t o = 0; o < sp.outer; ++o) {
          const Real* src = go.data() + o * sp.len * sp.inner + offset * sp.inner;
          for (std::size_t i = 0; i < block; ++i) gk[o * block + i] += src[i];
        }
      }
      offset += lens[k];
    }
  });
}

template <typename Real>
Var<Real> Graph<Real>::slice(Var<Real> a, std::size_t axis, std::size_t start, std::size_t length) {
  const auto& av = value(a);
  const AxisSplit sp = split_axis(av.shape, axis, "slice");
  if (start + length > sp.len || length == 0) {
    throw ValidationError("slice: [" + std::to_string(start) + ", " + std::to_string(start + length) +
                          ") out of range for axis of length " + std::to_string(sp.len));
  }
  Shape out_shape = av.shape;
  out_shape[axis] = length;
  Tensor<Real> out(out_shape);
  const std::size_t block = length * sp.inner;
  for (std::size_t o = 0; o < sp.outer; ++o) {
    std::copy_n(av.data.begin() + static_cast<std::ptrdiff_t>(o * sp.len * sp.inner + start * sp.inner), block,
                out.data.begin() + static_cast<std::ptrdiff_t>(o * block));
  }
  return push("slice", std::move(out), {a}, [a, sp, start, block](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t o = 0; o < sp.outer; ++o) {
      Real* dst = ga.data() + o * sp.len * sp.inner + start * sp.inner;
      for (std::size_t i = 0; i < block; ++i) dst[i] += go[o * block + i];
    }
  });
}

template <typename Real>
Var<Real> Graph<Real>::broadcast(Var<Real> a, Shape shape) {
  const auto& av = value(a);
  if (broadcast_shape(av.shape, shape, "broadcast") != shape) {
    throw ValidationError("broadcast: cannot expand " + shape_string(av.shape) + " to " + shape_string(shape));
  }
  auto idx = std::make_shared<std::vector<std::uint32_t>>(broadcast_index(av.shape, shape));
  Tensor<Real> out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[(*idx)[i]];
  return push("broadcast", std::move(out), {a}, [a, idx](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < go.size(); ++i) ga[(*idx)[i]] += go[i];
  });
}

// ---------------------------------------------------------------------------
// Reductions

template <typename Real>
Var<Real> Graph<Real>::sum(Var<Real> a, std::size_t axis, bool keepdim) {
  const auto& av = value(a);
  const AxisSplit sp = split_axis(av.shape, axis, "sum");
  Tensor<Real> out(reduced_shape(av.shape, axis, keepdim));
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t l = 0; l < sp.len; ++l)
      for (std::size_t i = 0; i < sp.inner; ++i)
        out.data[o * sp.inner + i] += av.data[(o * sp.len + l) * sp.inner + i];
  return push("sum", std::move(out), {a}, [a, sp](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t l = 0; l < sp.len; ++l)
        for (std::size_t i = 0; i < sp.inner; ++i) ga[(o * sp.len + l) * sp.inner + i] += go[o * sp.inner + i];
  });
}

template <typename Real>
Var<Real> Graph<Real>::mean(Var<Real> a, std::size_t axis, bool keepdim) {
  const std::size_t len = split_axis(value(a).shape, axis, "mean").len;
  return scale(sum(a, axis, keepdim), Real(1) / static_cast<Real>(len));
}

template <typename Real>
Var<Real> Graph<Real>::variance(Var<Real> a, std::size_t axis, bool keepdim) {
  const auto& av = value(a);
  const AxisSplit sp = split_axis(av.shape, axis, "variance");
  const Real inv_n = Real(1) / static_cast<Real>(sp.len);
  auto mu = std::make_shared<std::vector<Real>>(sp.outer * sp.inner, Real(0));
  Tensor<Real> out(reduced_shape(av.shape, axis, keepdim));
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t i = 0; i < sp.inner; ++i) {
      Real m = 0;
      for (std::size_t l = 0; l < sp.len; ++l) m += av.data[(o * sp.len + l) * sp.inner + i];
      m *= inv_n;
      Real v = 0;
      for (std::size_t l = 0; l < sp.len; ++l) {
        const Real d = av.data[(o * sp.len + l) * sp.inner + i] - m;
        v += d * d;
      }
      (*mu)[o * sp.inner + i] = m;
      out.data[o * sp.inner + i] = v * inv_n;
    }
  return push("variance", std::move(out), {a}, [a, sp, mu, inv_n](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    const auto& x = g.value(a).data;
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t l = 0; l < sp.len; ++l)
        for (std::size_t i = 0; i < sp.inner; ++i) {
          const std::size_t j = (o * sp.len + l) * sp.inner + i;
          ga[j] += go[o * sp.inner + i] * Real(2) * (x[j] - (*mu)[o * sp.inner + i]) * inv_n;
        }
  });
}

template <typename Real>
Var<Real> Graph<Real>::sum_all(Var<Real> a) {
  const auto& av = value(a);
  Real s = 0;
  for (Real v : av.data) s += v;
  return push("sum_all", Tensor<Real>::scalar(s), {a}, [a](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (auto& v : ga) v += go[0];
  });
}

template <typename Real>
Var<Real> Graph<Real>::mean_all(Var<Real> a) {
  return scale(sum_all(a), Real(1) / static_cast<Real>(value(a).size()));
}

// ---------------------------------------------------------------------------
// Normalization

template <typename Real>
Var<Real> Graph<Real>::softmax(Var<Real> a, std::size_t axis, const Mask* mask) {
  const auto& av = value(a);
  const AxisSplit sp = split_axis(av.shape, axis, "softmax");
  if (mask && mask->size() != sp.len) {
    throw ValidationError("softmax: mask length " + std::to_string(mask->size()) +
                          " does not match axis length " + std::to_string(sp.len));
  }
  if (mask && std::none_of(mask->begin(), mask->end(), [](auto m) { return m != 0; })) {
    throw ValidationError("softmax: fully masked row");
  }
  auto valid = [&](std::size_t l) { return !mask || (*mask)[l] != 0; };
  Tensor<Real> out(av.shape);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t i = 0; i < sp.inner; ++i) {
      Real mx = -std::numeric_limits<Real>::infinity();
      for (std::size_t l = 0; l < sp.len; ++l)
        if (valid(l)) mx = std::max(mx, av.data[(o * sp.len + l) * sp.inner + i]);
      Real z = 0;
      for (std::size_t l = 0; l < sp.len; ++l) {
        const std::size_t j = (o * sp.len + l) * sp.inner + i;
        out.data[j] = valid(l) ? std::exp(av.data[j] - mx) : Real(0);
        z += out.data[j];
      }
      for (std::size_t l = 0; l < sp.len; ++l) out.data[(o * sp.len + l) * sp.inner + i] /= z;
    }
  auto y = std::make_shared<std::vector<Real>>(out.data);
  return push("softmax", std::move(out), {a}, [a, sp, y](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t i = 0; i < sp.inner; ++i) {
        Real dot = 0;
        for (std::size_t l = 0; l < sp.len; ++l) {
          const std::size_t j = (o * sp.len + l) * sp.inner + i;
          dot += (*y)[j] * go[j];
        }
        for (std::size_t l = 0; l < sp.len; ++l) {
          const std::size_t j = (o * sp.len + l) * sp.inner + i;
          ga[j] += (*y)[j] * (go[j] - dot);
        }
      }
  });
}

template <typename Real>
Var<Real> Graph<Real>::layer_norm(Var<Real> a, std::size_t axis, Real eps) {
  const auto& av = value(a);
  const AxisSplit sp = split_axis(av.shape, axis, "layer_norm");
  const Real inv_n = Real(1) / static_cast<Real>(sp.len);
  auto inv_sigma = std::make_shared<std::vector<Real>>(sp.outer * sp.inner);
  Tensor<Real> out(av.shape);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t i = 0; i < sp.inner; ++i) {
      Real m = 0;
      for (std::size_t l = 0; l < sp.len; ++l) m += av.data[(o * sp.len + l) * sp.inner + i];
      m *= inv_n;
      Real v = 0;
      for (std::size_t l = 0; l < sp.len; ++l) {
        const Real d = av.data[(o * sp.len + l) * sp.inner + i] - m;
        v += d * d;
      }
      const Real is = Real(1) / std::sqrt(v * inv_n + eps);
      (*inv_sigma)[o * sp.inner + i] = is;
      for (std::size_t l = 0; l < sp.len; ++l) {
        const std::size_t j = (o * sp.len + l) * sp.inner + i;
        out.data[j] = (av.data[j] - m) * is;
      }
    }
  auto y = std::make_shared<std::vector<Real>>(out.data);
  return push("layer_norm", std::move(out), {a}, [a, sp, y, inv_sigma, inv_n](Graph& g, const std::vector<Real>& go) {
    auto& ga = g.grad_buffer(a);
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t i = 0; i < sp.inner; ++i) {
        Real mg = 0, mgy = 0;
        for (std::size_t l = 0; l < sp.len; ++l) {
          const std::size_t j = (o * sp.len + l) * sp.inner + i;
          mg += go[j];
          mgy += go[j] * (*y)[j];
        }
        mg *= inv_n;
        mgy *= inv_n;
        const Real is = (*inv_sigma)[o * sp.inner + i];
        for (std::size_t l = 0; l < sp.len; ++l) {
          const std::size_t j = (o * sp.len + l) * sp.inner + i;
          ga[j] += is * (go[j] - mg - (*y)[j] * mgy);
        }
      }
  });
}

template class Graph<float>;
template class Graph<double>;

}  // namespace hear::grad
