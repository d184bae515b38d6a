// src/model/model.cc

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

#include "hear/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hear/core/error.hpp"
#include "hear/core/seed.hpp"

namespace hear::model {

using grad::Shape;

template <typename Real>
Var<Real> Binder<Real>::operator()(Tensor<Real>& param) {
  auto it = bound_.find(&param);
  if (it != bound_.end()) return it->second;
  auto v = requires_grad_ ? graph_.parameter(param) : graph_.constant(Tensor<Real>(param.shape, param.data));
  bound_.emplace(&param, v);
  return v;
}

template <typename Real>
BranchInput<Real> make_input(const EmbeddingSequence& seq, std::size_t padded_frames) {
  seq.validate();
  const std::size_t t = std::max(seq.num_frames, padded_frames);
  BranchInput<Real> in;
  in.frames = Tensor<Real>(Shape{t, seq.dim});
  for (std::size_t i = 0; i < seq.frames.size(); ++i) in.frames.data[i] = static_cast<Real>(seq.frames[i]);
  in.mask.assign(t, 0);
  std::fill(in.mask.begin(), in.mask.begin() + static_cast<std::ptrdiff_t>(seq.num_frames), 1);
  return in;
}

template <typename Real>
ModelInputs<Real> make_inputs(const std::map<std::string, EmbeddingSequence>& seqs) {
  ModelInputs<Real> out;
  for (const auto& [source, seq] : seqs) out.emplace(source, make_input<Real>(seq));
  return out;
}

namespace {

std::string block_prefix(const BranchConfig& b, std::size_t layer) {
  return b.source_id + ".block" + std::to_string(layer);
}

std::string pool_prefix(const BranchConfig& b, std::size_t query, std::size_t head) {
  return b.source_id + ".pool.q" + std::to_string(query) + ".h" + std::to_string(head);
}

// Column vector [n, 1] of mask values.
template <typename Real>
Tensor<Real> mask_column(const Mask& mask) {
  Tensor<Real> t(Shape{mask.size(), 1});
  for (std::size_t i = 0; i < mask.size(); ++i) t.data[i] = mask[i] ? Real(1) : Real(0);
  return t;
}

bool all_valid(const Mask& mask) {
  return std::all_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
}

}  // namespace

template <typename Real>
HearModel<Real>::HearModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& b : cfg_.branches) {
    const std::size_t d = b.model_dim;
    const std::size_t dh = d / b.attention_heads;
    add_linear(b.source_id + ".proj", b.input_dim, d);
    for (std::size_t l = 0; l < b.attention_depth; ++l) {
      const auto pre = block_prefix(b, l);
      add_param(pre + ".ln1.gain", Shape{d}, 0, Real(1));
      add_param(pre + ".ln1.bias", Shape{d}, 0);
      for (const char* name : {".attn.q", ".attn.k", ".attn.v", ".attn.out"}) add_linear(pre + name, d, d);
      add_param(pre + ".ln2.gain", Shape{d}, 0, Real(1));
      add_param(pre + ".ln2.bias", Shape{d}, 0);
      add_linear(pre + ".mlp.fc1", d, 4 * d);
      add_linear(pre + ".mlp.fc2", 4 * d, d);
    }
    for (std::size_t m = 0; m < b.pooling_queries; ++m) {
      for (std::size_t g = 0; g < b.attention_heads; ++g) {
        const auto pre = pool_prefix(b, m, g);
        add_linear(pre + ".fc1", dh, dh);
        add_linear(pre + ".fc2", dh, 1);
      }
    }
  }
  add_linear("head.fc1", cfg_.fused_dim(), cfg_.head_hidden);
  add_linear("head.fc2", cfg_.head_hidden, cfg_.output_dim());
}

template <typename Real>
void HearModel<Real>::add_param(const std::string& name, Shape shape, std::size_t fan_in, Real fill) {
  Tensor<Real> t(std::move(shape), fill);
  if (fan_in > 0) {
    std::mt19937_64 rng(derive_seed({cfg_.seed, hash_string(name)}));
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : t.data) v = static_cast<Real>(dist(rng));
  }
  index_.emplace(name, params_.size());
  params_.push_back({name, std::move(t)});
}

template <typename Real>
void HearModel<Real>::add_linear(const std::string& prefix, std::size_t in, std::size_t out) {
  add_param(prefix + ".weight", Shape{in, out}, in);
  add_param(prefix + ".bias", Shape{out}, in);
}

template <typename Real>
Tensor<Real>& HearModel<Real>::param(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("no parameter named '" + name + "'");
  return params_[it->second].tensor;
}

template <typename Real>
const Tensor<Real>& HearModel<Real>::param(const std::string& name) const {
  return const_cast<HearModel*>(this)->param(name);
}

template <typename Real>
std::size_t HearModel<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

template <typename Real>
void HearModel<Real>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template <typename Real>
Var<Real> HearModel<Real>::project_and_downsample(Binder<Real>& bind, const BranchConfig& b,
                                                  const BranchInput<Real>& in, Mask& out_mask) {
  auto& g = bind.graph();
  const std::string where = "branch '" + b.source_id + "': ";
  if (in.frames.rank() != 2 || in.frames.dim(1) != b.input_dim) {
    throw ValidationError(where + "input dimension mismatch: expected [T, " + std::to_string(b.input_dim) +
                          "], got " + grad::shape_string(in.frames.shape));
  }
  const std::size_t t = in.frames.dim(0);
  if (in.mask.size() != t) throw ValidationError(where + "mask length does not match frame count");
  if (std::none_of(in.mask.begin(), in.mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw ValidationError(where + "no valid frames");
  }

  auto x = g.constant(Tensor<Real>(in.frames.shape, in.frames.data));
  auto h = g.add(g.matmul(x, bind(p(b.source_id + ".proj.weight"))), bind(p(b.source_id + ".proj.bias")));

  const std::size_t k = b.downsample_factor;
  const std::size_t tp = (t + k - 1) / k;
  out_mask.assign(tp, 0);
  if (k == 1) {
    out_mask = in.mask;
    if (all_valid(in.mask)) return h;
    return g.mul(h, g.constant(mask_column<Real>(in.mask)));
  }
  // Mean over the valid frames of each window, as a [T', T] averaging matrix.
  Tensor<Real> pool(Shape{tp, t});
  for (std::size_t w = 0; w < tp; ++w) {
    const std::size_t begin = w * k, end = std::min(t, begin + k);
    std::size_t count = 0;
    for (std::size_t i = begin; i < end; ++i) count += in.mask[i] ? 1 : 0;
    if (count == 0) continue;
    out_mask[w] = 1;
    const Real inv = Real(1) / static_cast<Real>(count);
    for (std::size_t i = begin; i < end; ++i) {
      if (in.mask[i]) pool.data[w * t + i] = inv;
    }
  }
  return g.matmul(g.constant(std::move(pool)), h);
}

template <typename Real>
Var<Real> HearModel<Real>::self_attention_block(Binder<Real>& bind, const BranchConfig& b, std::size_t layer,
                                                Var<Real> h, const Mask& mask, ForwardTrace<Real>* trace) {
  auto& g = bind.graph();
  const auto pre = block_prefix(b, layer);
  const std::size_t heads = b.attention_heads;
  const std::size_t dh = b.model_dim / heads;
  constexpr Real kLnEps = Real(1e-5);

  auto linear = [&](Var<Real> x, const std::string& name) {
    return g.add(g.matmul(x, bind(p(name + ".weight"))), bind(p(name + ".bias")));
  };
  auto norm = [&](Var<Real> x, const std::string& name) {
    auto n = g.layer_norm(x, 1, kLnEps);
    return g.add(g.mul(n, bind(p(name + ".gain"))), bind(p(name + ".bias")));
  };

  auto a = norm(h, pre + ".ln1");
  auto q = linear(a, pre + ".attn.q");
  auto k = linear(a, pre + ".attn.k");
  auto v = linear(a, pre + ".attn.v");
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));
  std::vector<Var<Real>> outs;
  if (trace) trace->attention[b.source_id].clear();
  for (std::size_t i = 0; i < heads; ++i) {
    auto qi = g.slice(q, 1, i * dh, dh);
    auto ki = g.slice(k, 1, i * dh, dh);
    auto vi = g.slice(v, 1, i * dh, dh);
    auto scores = g.scale(g.matmul(qi, g.transpose(ki)), scale);
    auto weights = g.softmax(scores, 1, &mask);
    if (trace) trace->attention[b.source_id].push_back(g.value(weights));
    outs.push_back(g.matmul(weights, vi));
  }
  h = g.add(h, linear(g.concat(outs, 1), pre + ".attn.out"));
  auto m = g.gelu(linear(norm(h, pre + ".ln2"), pre + ".mlp.fc1"));
  h = g.add(h, linear(m, pre + ".mlp.fc2"));
  return g.mul(h, g.constant(mask_column<Real>(mask)));
}

template <typename Real>
Var<Real> HearModel<Real>::mqmhastp(Binder<Real>& bind, const BranchConfig& b, Var<Real> h, const Mask& mask,
                                    ForwardTrace<Real>* trace) {
  auto& g = bind.graph();
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw ValidationError("branch '" + b.source_id + "': pooling over zero valid positions");
  }
  constexpr Real kStdEps = Real(1e-6);
  const std::size_t heads = b.attention_heads;
  const std::size_t dh = b.model_dim / heads;
  std::vector<Var<Real>> per_query;
  if (trace) trace->pooling[b.source_id].clear();
  for (std::size_t m = 0; m < b.pooling_queries; ++m) {
    std::vector<Var<Real>> mus, sds;
    for (std::size_t i = 0; i < heads; ++i) {
      const auto pre = pool_prefix(b, m, i);
      auto x = g.slice(h, 1, i * dh, dh);
      auto z = g.tanh(g.add(g.matmul(x, bind(p(pre + ".fc1.weight"))), bind(p(pre + ".fc1.bias"))));
      auto logits = g.add(g.matmul(z, bind(p(pre + ".fc2.weight"))), bind(p(pre + ".fc2.bias")));
      auto w = g.softmax(g.transpose(logits), 1, &mask);  // [1, T']
      if (trace) trace->pooling[b.source_id].push_back(g.value(w));
      auto mu = g.matmul(w, x);  // [1, dh]
      auto c = g.sub(x, mu);
      auto var = g.matmul(w, g.mul(c, c));
      mus.push_back(mu);
      sds.push_back(g.sqrt(g.add_scalar(var, kStdEps)));
    }
    mus.insert(mus.end(), sds.begin(), sds.end());
    per_query.push_back(g.concat(mus, 1));
  }
  return per_query.size() == 1 ? per_query.front() : g.concat(per_query, 1);
}

template <typename Real>
Var<Real> HearModel<Real>::branch(Binder<Real>& bind, const BranchConfig& b, const BranchInput<Real>& in,
                                  ForwardTrace<Real>* trace) {
  Mask mask;
  auto h = project_and_downsample(bind, b, in, mask);
  for (std::size_t l = 0; l < b.attention_depth; ++l) h = self_attention_block(bind, b, l, h, mask, trace);
  return mqmhastp(bind, b, h, mask, trace);
}

template <typename Real>
Var<Real> HearModel<Real>::fuse(Binder<Real>& bind, const ModelInputs<Real>& inputs, ForwardTrace<Real>* trace) {
  std::vector<Var<Real>> parts;
  for (const auto& b : cfg_.branches) {
    auto it = inputs.find(b.source_id);
    if (it == inputs.end()) throw ValidationError("missing input for branch '" + b.source_id + "'");
    parts.push_back(branch(bind, b, it->second, trace));
  }
  return parts.size() == 1 ? parts.front() : bind.graph().concat(parts, 1);
}

template <typename Real>
Var<Real> HearModel<Real>::head(Binder<Real>& bind, Var<Real> fused) {
  auto& g = bind.graph();
  if (fused.shape().size() != 2 || fused.dim(1) != cfg_.fused_dim()) {
    throw ValidationError("head: expected [B, " + std::to_string(cfg_.fused_dim()) + "], got " +
                          grad::shape_string(fused.shape()));
  }
  auto hidden = g.gelu(g.add(g.matmul(fused, bind(p("head.fc1.weight"))), bind(p("head.fc1.bias"))));
  return g.add(g.matmul(hidden, bind(p("head.fc2.weight"))), bind(p("head.fc2.bias")));
}

template <typename Real>
ScoreVector HearModel<Real>::predict(const ModelInputs<Real>& inputs) const {
  // Constant binding only reads parameters, so sharing one model across
  // threads for inference is safe.
  auto& self = const_cast<HearModel&>(*this);
  Graph<Real> g;
  Binder<Real> bind(g, false);
  auto out = self.head(bind, self.fuse(bind, inputs));
  ScoreVector s;
  for (Real v : g.value(out).data) s.values.push_back(static_cast<double>(v));
  s.dimension_names = default_dimension_names(s.values.size());
  return s;
}

template <typename Real>
ScoreVector HearModel<Real>::predict(const std::map<std::string, EmbeddingSequence>& inputs) const {
  return predict(make_inputs<Real>(inputs));
}

template class Binder<float>;
template class Binder<double>;
template class HearModel<float>;
template class HearModel<double>;
template BranchInput<float> make_input<float>(const EmbeddingSequence&, std::size_t);
template BranchInput<double> make_input<double>(const EmbeddingSequence&, std::size_t);
template ModelInputs<float> make_inputs<float>(const std::map<std::string, EmbeddingSequence>&);
template ModelInputs<double> make_inputs<double>(const std::map<std::string, EmbeddingSequence>&);

}  // namespace hear::model
