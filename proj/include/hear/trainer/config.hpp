// include/hear/trainer/config.hpp

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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hear/dsp/augment.hpp"
#include "hear/losses/losses.hpp"
#include "hear/mixup/mixup.hpp"
#include "hear/model/config.hpp"
#include "hear/trainer/adam.hpp"

namespace hear::trainer {

// Ablation switches; all combinations are plain configuration.
struct Toggles {
  bool use_mixup = true;
  bool use_augmented_data = false;
  bool use_hybrid_loss = true;
  std::vector<std::string> branches_enabled;  // empty: every configured branch
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 100;
  std::size_t early_stop_patience = 10;
  std::uint64_t seed = 0;
  int track = 1;
  grad::Precision precision = grad::Precision::kFloat32;
  // Positives for the validation TTA are the top (1 - q) of ground truth.
  double val_tta_quantile = 0.8;
  Toggles toggles;
  mixup::MixupConfig mixup;
  losses::LossConfig loss;
  model::ModelConfig model;
  dsp::AugmentConfig augment;

  // The model actually trained: enabled branches only, seed and precision
  // taken from this config.
  model::ModelConfig effective_model() const;
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
/// Reads a training config. `track` (when nonzero) overrides the file's
/// track before track-dependent defaults such as the loss beta are applied.
TrainConfig train_config_from_json(const nlohmann::json& j, int track = 0);
TrainConfig load_train_config(const std::filesystem::path& path, int track = 0);

}  // namespace hear::trainer
