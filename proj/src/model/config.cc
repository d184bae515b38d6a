// src/model/config.cc

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

#include "hear/model/config.hpp"

#include <set>

#include "hear/core/error.hpp"

namespace hear::model {

void BranchConfig::validate() const {
  const std::string where = "branch '" + source_id + "': ";
  if (source_id.empty()) throw ValidationError("branch source_id must not be empty");
  if (input_dim == 0) throw ValidationError(where + "input_dim must be positive");
  if (model_dim == 0) throw ValidationError(where + "model_dim must be positive");
  if (attention_heads == 0 || model_dim % attention_heads != 0) {
    throw ValidationError(where + "model_dim " + std::to_string(model_dim) +
                          " not divisible by attention_heads " + std::to_string(attention_heads));
  }
  if (downsample_factor < 1) throw ValidationError(where + "downsample_factor must be >= 1");
  if (pooling_queries < 1) throw ValidationError(where + "pooling_queries must be >= 1");
}

std::size_t ModelConfig::fused_dim() const {
  std::size_t n = 0;
  for (const auto& b : branches) n += b.pooled_dim();
  return n;
}

std::vector<embeddings::SourceRequest> ModelConfig::source_requests() const {
  std::vector<embeddings::SourceRequest> out;
  for (const auto& b : branches) out.push_back({b.source_id, b.scale});
  return out;
}

const BranchConfig& ModelConfig::branch(const std::string& source_id) const {
  for (const auto& b : branches) {
    if (b.source_id == source_id) return b;
  }
  throw ValidationError("no branch for source '" + source_id + "'");
}

void ModelConfig::validate() const {
  if (branches.empty()) throw ValidationError("model needs at least one branch");
  std::set<std::string> seen;
  for (const auto& b : branches) {
    b.validate();
    if (!seen.insert(b.source_id).second) {
      throw ValidationError("duplicate branch source '" + b.source_id + "'");
    }
  }
  track_output_dim(track);
  if (head_hidden == 0) throw ValidationError("head_hidden must be positive");
}

BranchConfig default_branch(std::string source_id, Scale scale, std::size_t input_dim) {
  BranchConfig b;
  b.source_id = std::move(source_id);
  b.scale = scale;
  b.input_dim = input_dim;
  b.downsample_factor = scale == Scale::kSegment ? 4 : 1;
  return b;
}

ModelConfig toy_model_config(int track, const embeddings::FeatureConfig& features) {
  ModelConfig m;
  m.track = track;
  m.features = features;
  m.branches.push_back(default_branch(std::string(embeddings::kToyLogmelSource), Scale::kSegment,
                                      features.n_mels));
  m.branches.push_back(default_branch(std::string(embeddings::kToyTrackSource), Scale::kTrack,
                                      2 * features.n_mels));
  return m;
}

std::string_view to_string(grad::Precision p) {
  return p == grad::Precision::kFloat64 ? "float64" : "float32";
}

grad::Precision precision_from_string(std::string_view s) {
  if (s == "float32" || s == "32") return grad::Precision::kFloat32;
  if (s == "float64" || s == "64") return grad::Precision::kFloat64;
  throw ValidationError("unknown precision '" + std::string(s) + "' (use float32 or float64)");
}

nlohmann::json to_json(const BranchConfig& b) {
  return {{"source_id", b.source_id},
          {"scale", std::string(to_string(b.scale))},
          {"input_dim", b.input_dim},
          {"model_dim", b.model_dim},
          {"downsample_factor", b.downsample_factor},
          {"attention_heads", b.attention_heads},
          {"pooling_queries", b.pooling_queries},
          {"attention_depth", b.attention_depth}};
}

nlohmann::json to_json(const ModelConfig& m) {
  nlohmann::json branches = nlohmann::json::array();
  for (const auto& b : m.branches) branches.push_back(to_json(b));
  return {{"branches", branches},
          {"track", m.track},
          {"head_hidden", m.head_hidden},
          {"features",
           {{"n_mels", m.features.n_mels},
            {"hop_s", m.features.hop_s},
            {"track_window_s", m.features.track_window_s}}},
          {"seed", m.seed},
          {"precision", std::string(to_string(m.precision))}};
}

BranchConfig branch_config_from_json(const nlohmann::json& j) {
  const auto scale = scale_from_string(j.value("scale", std::string("segment")));
  BranchConfig b = default_branch(j.at("source_id").get<std::string>(), scale,
                                  j.value("input_dim", std::size_t{0}));
  b.model_dim = j.value("model_dim", b.model_dim);
  b.downsample_factor = j.value("downsample_factor", b.downsample_factor);
  b.attention_heads = j.value("attention_heads", b.attention_heads);
  b.pooling_queries = j.value("pooling_queries", b.pooling_queries);
  b.attention_depth = j.value("attention_depth", b.attention_depth);
  return b;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig m;
  m.track = j.value("track", m.track);
  m.head_hidden = j.value("head_hidden", m.head_hidden);
  m.seed = j.value("seed", m.seed);
  if (j.contains("precision")) m.precision = precision_from_string(j.at("precision").get<std::string>());
  if (j.contains("features")) {
    const auto& f = j.at("features");
    m.features.n_mels = f.value("n_mels", m.features.n_mels);
    m.features.hop_s = f.value("hop_s", m.features.hop_s);
    m.features.track_window_s = f.value("track_window_s", m.features.track_window_s);
  }
  if (j.contains("branches")) {
    for (const auto& b : j.at("branches")) {
      auto bc = branch_config_from_json(b);
      // Toy sources have a known input width.
      if (bc.input_dim == 0 && bc.source_id == embeddings::kToyLogmelSource) bc.input_dim = m.features.n_mels;
      if (bc.input_dim == 0 && bc.source_id == embeddings::kToyTrackSource) bc.input_dim = 2 * m.features.n_mels;
      m.branches.push_back(bc);
    }
  } else {
    const auto toy = toy_model_config(m.track, m.features);
    m.branches = toy.branches;
  }
  m.validate();
  return m;
}

}  // namespace hear::model
