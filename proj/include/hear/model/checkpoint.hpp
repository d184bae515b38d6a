// include/hear/model/checkpoint.hpp

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

#include "hear/model/model.hpp"

namespace hear::model {

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Tensor as stored in a checkpoint: always 32-bit on disk.
struct StoredTensor {
  std::string name;
  grad::Shape shape;
  std::vector<float> data;
};

struct CheckpointContents {
  nlohmann::json config;  // {"model": ..., plus optional training metadata}
  std::vector<StoredTensor> tensors;
};

std::vector<std::uint8_t> encode_checkpoint(const CheckpointContents& c);
CheckpointContents decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& context);

template <typename Real>
CheckpointContents snapshot(const HearModel<Real>& model, nlohmann::json metadata = nlohmann::json::object());

// Rebuilds a model from its stored config and overwrites every parameter.
// Missing, unknown or mis-shaped tensors are ValidationErrors.
template <typename Real>
HearModel<Real> restore(const CheckpointContents& c);

template <typename Real>
void save_checkpoint(const HearModel<Real>& model, const std::filesystem::path& path,
                     nlohmann::json metadata = nlohmann::json::object());
CheckpointContents read_checkpoint(const std::filesystem::path& path);
template <typename Real>
HearModel<Real> load_checkpoint(const std::filesystem::path& path);

// Rounds every parameter to float32 in place, matching what a checkpoint
// stores.
template <typename Real>
void round_to_stored(HearModel<Real>& model);

}  // namespace hear::model
