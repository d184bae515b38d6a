// include/hear/trainer/adam.hpp

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

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hear/grad/tensor.hpp"
#include "hear/model/model.hpp"

namespace hear::trainer {

struct AdamConfig {
  double learning_rate = 1e-5;
  double weight_decay = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct OptimizerState {
  std::vector<std::vector<double>> m;  // first moments, one per parameter
  std::vector<std::vector<double>> v;  // second moments
  std::uint64_t t = 0;
};

template <typename Real>
struct ParamSlot {
  std::string_view name;
  grad::Tensor<Real>* tensor;
};

/// One AdamW step: decoupled decay p *= (1 - lr * wd), then the
/// bias-corrected Adam update. Gradients come from each tensor's grad buffer
/// (empty means zero). All gradients are checked before anything is
/// modified; a non-finite one throws NumericalError naming the tensor.
template <typename Real>
void adam_step(std::span<const ParamSlot<Real>> params, OptimizerState& state, const AdamConfig& cfg);

template <typename Real>
void adam_step(model::HearModel<Real>& model, OptimizerState& state, const AdamConfig& cfg);

}  // namespace hear::trainer
