// include/hear/model/model.hpp

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

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "hear/core/types.hpp"
#include "hear/grad/graph.hpp"
#include "hear/model/config.hpp"

namespace hear::model {

using grad::Graph;
using grad::Mask;
using grad::Tensor;
using grad::Var;

/// Binds model parameters into one graph, once each. With requires_grad off
/// parameters enter as constants (inference builds no backward closures).
template <typename Real>
class Binder {
 public:
  Binder(Graph<Real>& graph, bool requires_grad) : graph_(graph), requires_grad_(requires_grad) {}
  Var<Real> operator()(Tensor<Real>& param);
  Graph<Real>& graph() { return graph_; }

 private:
  Graph<Real>& graph_;
  bool requires_grad_;
  std::unordered_map<const Tensor<Real>*, Var<Real>> bound_;
};

/// Frames of one source as a [T, input_dim] tensor plus validity mask.
template <typename Real>
struct BranchInput {
  Tensor<Real> frames;
  Mask mask;
};

template <typename Real>
BranchInput<Real> make_input(const EmbeddingSequence& seq, std::size_t padded_frames = 0);

template <typename Real>
using ModelInputs = std::map<std::string, BranchInput<Real>>;

template <typename Real>
ModelInputs<Real> make_inputs(const std::map<std::string, EmbeddingSequence>& seqs);

// Optional capture of intermediate attention weights, for inspection.
template <typename Real>
struct ForwardTrace {
  // attention[branch][head] is [T', T'] (last block); pooling[branch][m*h+g] is [1, T'].
  std::map<std::string, std::vector<Tensor<Real>>> attention;
  std::map<std::string, std::vector<Tensor<Real>>> pooling;
};

template <typename Real>
class HearModel {
 public:
  struct Param {
    std::string name;
    Tensor<Real> tensor;
  };

  // Parameters are initialized from cfg.seed.
  explicit HearModel(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  std::vector<Param>& parameters() { return params_; }
  const std::vector<Param>& parameters() const { return params_; }
  Tensor<Real>& param(const std::string& name);
  const Tensor<Real>& param(const std::string& name) const;
  std::size_t parameter_count() const;
  void zero_grad();

  // Projection then non-overlapping mean over k frames. Writes the
  // downsampled mask into out_mask.
  Var<Real> project_and_downsample(Binder<Real>& bind, const BranchConfig& b, const BranchInput<Real>& in,
                                   Mask& out_mask);
  Var<Real> self_attention_block(Binder<Real>& bind, const BranchConfig& b, std::size_t layer, Var<Real> h,
                                 const Mask& mask, ForwardTrace<Real>* trace = nullptr);
  // [T', D] -> [1, 2qD]
  Var<Real> mqmhastp(Binder<Real>& bind, const BranchConfig& b, Var<Real> h, const Mask& mask,
                     ForwardTrace<Real>* trace = nullptr);
  // Full branch pipeline for one item: [1, 2qD].
  Var<Real> branch(Binder<Real>& bind, const BranchConfig& b, const BranchInput<Real>& in,
                   ForwardTrace<Real>* trace = nullptr);
  // Concatenated branch outputs for one item: [1, fused_dim].
  Var<Real> fuse(Binder<Real>& bind, const ModelInputs<Real>& inputs, ForwardTrace<Real>* trace = nullptr);
  // [B, fused_dim] -> [B, output_dim]
  Var<Real> head(Binder<Real>& bind, Var<Real> fused);

  // Inference on one item; no gradients.
  ScoreVector predict(const std::map<std::string, EmbeddingSequence>& inputs) const;
  ScoreVector predict(const ModelInputs<Real>& inputs) const;

 private:
  // Adds a tensor filled with `fill`, or uniform in +-sqrt(1/fan_in) when fan_in > 0.
  void add_param(const std::string& name, grad::Shape shape, std::size_t fan_in, Real fill = Real(0));
  void add_linear(const std::string& prefix, std::size_t in, std::size_t out);
  Tensor<Real>& p(const std::string& name) { return params_[index_.at(name)].tensor; }

  ModelConfig cfg_;
  std::vector<Param> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

extern template class Binder<float>;
extern template class Binder<double>;
extern template class HearModel<float>;
extern template class HearModel<double>;

}  // namespace hear::model
