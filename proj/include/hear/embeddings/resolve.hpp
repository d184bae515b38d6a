// include/hear/embeddings/resolve.hpp

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
#include <optional>
#include <string>
#include <vector>

#include "hear/core/manifest.hpp"
#include "hear/core/types.hpp"
#include "hear/embeddings/toy_features.hpp"

namespace hear::embeddings {

struct SourceRequest {
  std::string source_id;
  Scale scale = Scale::kSegment;
};

struct ResolvedFeatures {
  std::map<std::string, EmbeddingSequence> by_source;
  // source_id -> "hemb:<path>" or "toy:<audio path>"
  std::map<std::string, std::string> provenance;
};

/// Gathers one sequence per requested source for a manifest entry.
///
/// HEMB files listed in embedding_paths take priority. Toy sources fall back
/// to computing features from the entry's audio. A source available by
/// neither route, or a file whose scale disagrees with the request, throws
/// ValidationError naming the source. `audio` overrides reading audio_path
/// (used for augmented copies held in memory).
ResolvedFeatures resolve_features(const ManifestEntry& entry, const Manifest& manifest,
                                  const std::vector<SourceRequest>& sources, const FeatureConfig& cfg,
                                  const AudioClip* audio = nullptr);

// Toy features straight from a clip, for the requested toy sources only.
std::map<std::string, EmbeddingSequence> toy_features(const AudioClip& clip,
                                                      const std::vector<SourceRequest>& sources,
                                                      const FeatureConfig& cfg);

}  // namespace hear::embeddings
