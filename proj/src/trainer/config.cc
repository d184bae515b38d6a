// src/trainer/config.cc

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

#include "hear/trainer/config.hpp"

#include <algorithm>
#include <fstream>

#include "hear/core/error.hpp"

namespace hear::trainer {

model::ModelConfig TrainConfig::effective_model() const {
  model::ModelConfig m = model;
  m.track = track;
  m.seed = seed;
  m.precision = precision;
  if (!toggles.branches_enabled.empty()) {
    for (const auto& name : toggles.branches_enabled) {
      const bool known = std::any_of(m.branches.begin(), m.branches.end(),
                                     [&](const model::BranchConfig& b) { return b.source_id == name; });
      if (!known) throw ValidationError("branches_enabled names unknown branch '" + name + "'");
    }
    std::erase_if(m.branches, [&](const model::BranchConfig& b) {
      return std::find(toggles.branches_enabled.begin(), toggles.branches_enabled.end(), b.source_id) ==
             toggles.branches_enabled.end();
    });
  }
  m.validate();
  return m;
}

void TrainConfig::validate() const {
  adam.validate();
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (early_stop_patience < 1) throw ValidationError("early_stop_patience must be >= 1");
  track_output_dim(track);
  if (!(val_tta_quantile >= 0.0 && val_tta_quantile <= 1.0)) {
    throw ValidationError("val_tta_quantile must lie in [0, 1]");
  }
  mixup.validate();
  loss.validate();
  augment.validate();
  effective_model();
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.adam.learning_rate},
          {"weight_decay", c.adam.weight_decay},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"early_stop_patience", c.early_stop_patience},
          {"seed", c.seed},
          {"track", c.track},
          {"precision", std::string(model::to_string(c.precision))},
          {"val_tta_quantile", c.val_tta_quantile},
          {"toggles",
           {{"use_mixup", c.toggles.use_mixup},
            {"use_augmented_data", c.toggles.use_augmented_data},
            {"use_hybrid_loss", c.toggles.use_hybrid_loss},
            {"branches_enabled", c.toggles.branches_enabled}}},
          {"mixup", mixup::to_json(c.mixup)},
          {"loss", losses::to_json(c.loss)},
          {"model", model::to_json(c.model)},
          {"augment", dsp::to_json(c.augment)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, int track) {
  TrainConfig c;
  try {
    c.track = track != 0 ? track : j.value("track", 1);
    track_output_dim(c.track);
    c.adam.learning_rate = j.value("learning_rate", c.adam.learning_rate);
    c.adam.weight_decay = j.value("weight_decay", c.adam.weight_decay);
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      c.adam.beta1 = a.value("beta1", c.adam.beta1);
      c.adam.beta2 = a.value("beta2", c.adam.beta2);
      c.adam.eps = a.value("eps", c.adam.eps);
    }
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.seed = j.value("seed", c.seed);
    if (j.contains("precision")) c.precision = model::precision_from_string(j.at("precision").get<std::string>());
    c.val_tta_quantile = j.value("val_tta_quantile", c.val_tta_quantile);
    if (j.contains("toggles")) {
      const auto& t = j.at("toggles");
      c.toggles.use_mixup = t.value("use_mixup", c.toggles.use_mixup);
      c.toggles.use_augmented_data = t.value("use_augmented_data", c.toggles.use_augmented_data);
      c.toggles.use_hybrid_loss = t.value("use_hybrid_loss", c.toggles.use_hybrid_loss);
      c.toggles.branches_enabled = t.value("branches_enabled", c.toggles.branches_enabled);
    }
    c.mixup = mixup::mixup_config_from_json(j.value("mixup", nlohmann::json::object()));
    c.loss = losses::loss_config_from_json(j.value("loss", nlohmann::json::object()), c.track);
    auto model_json = j.value("model", nlohmann::json::object());
    model_json["track"] = c.track;
    c.model = model::model_config_from_json(model_json);
    if (j.contains("augment")) c.augment = dsp::augment_config_from_json(j.at("augment"));
    c.augment.seed = j.contains("augment") && j.at("augment").contains("seed") ? c.augment.seed : c.seed;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path, int track) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open training config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("training config " + path.string() + " is not valid JSON: " + e.what());
  }
  return train_config_from_json(j, track);
}

}  // namespace hear::trainer
