// include/hear/trainer/trainer.hpp

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

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hear/core/manifest.hpp"
#include "hear/metrics/metrics.hpp"
#include "hear/trainer/config.hpp"

namespace hear::trainer {

struct TrainOptions {
  // Receives model.hckp (best checkpoint) and history.jsonl.
  std::filesystem::path out_dir;
  std::ostream* log = nullptr;  // progress lines; nullptr is silent
};

struct TrainResult {
  std::filesystem::path checkpoint;
  std::filesystem::path history_path;
  std::vector<nlohmann::json> history;  // one object per epoch
  std::optional<std::size_t> best_epoch;
  std::optional<double> best_val_srcc;
};

/// Trains on the manifest's train split and selects the checkpoint with the
/// best validation aggregate SRCC. The initial parameters are saved first,
/// so a checkpoint exists even when no epoch runs.
TrainResult train(const Manifest& manifest, const TrainConfig& cfg, const TrainOptions& options);

struct Prediction {
  std::string id;
  ScoreVector scores;
};

// Deterministic forward passes with a stored checkpoint, for one split or
// (when split is empty) every entry.
std::vector<Prediction> predict_entries(const std::filesystem::path& checkpoint, const Manifest& manifest,
                                        std::optional<Split> split);

metrics::MetricsReport evaluate(const std::filesystem::path& checkpoint, const Manifest& manifest, Split split,
                                const metrics::ThresholdSpec& threshold);

}  // namespace hear::trainer
