// include/hear/model/config.hpp

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
#include <string>
#include <vector>

#include <json.hpp>

#include "hear/core/types.hpp"
#include "hear/embeddings/resolve.hpp"
#include "hear/embeddings/toy_features.hpp"
#include "hear/grad/tensor.hpp"

namespace hear::model {

/// One feature source's pipeline: projection, downsampling, self-attention,
/// multi-query multi-head attentive statistics pooling.
struct BranchConfig {
  std::string source_id;
  Scale scale = Scale::kSegment;
  std::size_t input_dim = 0;
  std::size_t model_dim = 256;
  std::size_t downsample_factor = 4;  // 1 for track-scale sources
  std::size_t attention_heads = 4;
  std::size_t pooling_queries = 2;
  std::size_t attention_depth = 1;

  std::size_t pooled_dim() const { return 2 * pooling_queries * model_dim; }
  void validate() const;
};

struct ModelConfig {
  std::vector<BranchConfig> branches;
  int track = 1;
  std::size_t head_hidden = 512;
  embeddings::FeatureConfig features;
  std::uint64_t seed = 0;
  grad::Precision precision = grad::Precision::kFloat32;

  std::size_t output_dim() const { return track_output_dim(track); }
  std::size_t fused_dim() const;
  std::vector<embeddings::SourceRequest> source_requests() const;
  const BranchConfig& branch(const std::string& source_id) const;
  void validate() const;
};

// Default branch for a source: k = 4 at segment scale, 1 at track scale.
BranchConfig default_branch(std::string source_id, Scale scale, std::size_t input_dim);

// Two toy branches (log-mel segment + track statistics).
ModelConfig toy_model_config(int track, const embeddings::FeatureConfig& features = {});

nlohmann::json to_json(const BranchConfig& b);
nlohmann::json to_json(const ModelConfig& m);
BranchConfig branch_config_from_json(const nlohmann::json& j);
ModelConfig model_config_from_json(const nlohmann::json& j);

std::string_view to_string(grad::Precision p);
grad::Precision precision_from_string(std::string_view s);

}  // namespace hear::model
