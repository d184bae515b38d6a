// src/trainer/adam.cc

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

#include "hear/trainer/adam.hpp"

#include <cmath>
#include <string>

#include "hear/core/error.hpp"

namespace hear::trainer {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ValidationError("adam eps must be positive");
}

template <typename Real>
void adam_step(std::span<const ParamSlot<Real>> params, OptimizerState& state, const AdamConfig& cfg) {
  if (state.t == 0 && state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor->size(), 0.0);
      state.v.emplace_back(p.tensor->size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ValidationError("optimizer state does not match parameter list");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& t = *params[k].tensor;
    if (state.m[k].size() != t.size()) {
      throw ValidationError("optimizer state shape mismatch for '" + std::string(params[k].name) + "'");
    }
    if (t.has_grad() && t.grad.size() != t.size()) {
      throw ValidationError("gradient shape mismatch for '" + std::string(params[k].name) + "'");
    }
    for (std::size_t i = 0; i < t.grad.size(); ++i) {
      if (!std::isfinite(t.grad[i])) {
        throw NumericalError("non-finite gradient in '" + std::string(params[k].name) + "' at element " +
                             std::to_string(i));
      }
    }
  }
  ++state.t;
  const double decay = 1.0 - cfg.learning_rate * cfg.weight_decay;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& t = *params[k].tensor;
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double g = t.has_grad() ? static_cast<double>(t.grad[i]) : 0.0;
      double w = static_cast<double>(t.data[i]) * decay;
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      w -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
      t.data[i] = static_cast<Real>(w);
    }
  }
}

template <typename Real>
void adam_step(model::HearModel<Real>& model, OptimizerState& state, const AdamConfig& cfg) {
  std::vector<ParamSlot<Real>> slots;
  for (auto& p : model.parameters()) slots.push_back({p.name, &p.tensor});
  adam_step<Real>(std::span<const ParamSlot<Real>>(slots), state, cfg);
}

template void adam_step<float>(std::span<const ParamSlot<float>>, OptimizerState&, const AdamConfig&);
template void adam_step<double>(std::span<const ParamSlot<double>>, OptimizerState&, const AdamConfig&);
template void adam_step<float>(model::HearModel<float>&, OptimizerState&, const AdamConfig&);
template void adam_step<double>(model::HearModel<double>&, OptimizerState&, const AdamConfig&);

}  // namespace hear::trainer
