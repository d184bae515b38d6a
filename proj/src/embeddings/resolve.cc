// src/embeddings/resolve.cc

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

#include "hear/embeddings/resolve.hpp"

#include <algorithm>

#include "hear/core/audio_io.hpp"
#include "hear/core/embedding_io.hpp"
#include "hear/core/error.hpp"

namespace hear::embeddings {

std::map<std::string, EmbeddingSequence> toy_features(const AudioClip& clip,
                                                      const std::vector<SourceRequest>& sources,
                                                      const FeatureConfig& cfg) {
  std::map<std::string, EmbeddingSequence> out;
  std::optional<EmbeddingSequence> logmel;
  auto get_logmel = [&]() -> const EmbeddingSequence& {
    if (!logmel) logmel = toy_logmel(clip, cfg.n_mels, cfg.hop_s);
    return *logmel;
  };
  for (const auto& req : sources) {
    if (req.source_id == kToyLogmelSource) {
      out[req.source_id] = get_logmel();
    } else if (req.source_id == kToyTrackSource) {
      out[req.source_id] = toy_track_stats(get_logmel(), cfg.track_window_s);
    }
  }
  return out;
}

ResolvedFeatures resolve_features(const ManifestEntry& entry, const Manifest& manifest,
                                  const std::vector<SourceRequest>& sources, const FeatureConfig& cfg,
                                  const AudioClip* audio) {
  ResolvedFeatures result;
  std::optional<AudioClip> loaded;
  std::vector<SourceRequest> toy_needed;
  for (const auto& req : sources) {
    auto it = entry.embedding_paths.find(req.source_id);
    if (it != entry.embedding_paths.end() && audio == nullptr) {
      const auto path = manifest.resolve(it->second);
      auto seq = read_embedding(path);
      if (seq.scale != req.scale) {
        throw ValidationError("entry '" + entry.id + "': source '" + req.source_id + "' file " +
                              path.string() + " has scale " + std::string(to_string(seq.scale)) +
                              " but the branch expects " + std::string(to_string(req.scale)));
      }
      result.by_source[req.source_id] = std::move(seq);
      result.provenance[req.source_id] = "hemb:" + path.string();
      continue;
    }
    if (is_toy_source(req.source_id) && (audio || entry.audio_path)) {
      toy_needed.push_back(req);
      continue;
    }
    throw ValidationError("entry '" + entry.id + "': source '" + req.source_id +
                          "' unavailable (no embedding file and no way to compute it from audio)");
  }
  if (!toy_needed.empty()) {
    if (!audio) {
      loaded = read_wav(manifest.resolve(*entry.audio_path));
      audio = &*loaded;
    }
    auto toy = toy_features(*audio, toy_needed, cfg);
    for (auto& [source, seq] : toy) {
      const auto req = std::find_if(toy_needed.begin(), toy_needed.end(),
                                    [&](const SourceRequest& r) { return r.source_id == source; });
      if (seq.scale != req->scale) {
        throw ValidationError("source '" + source + "' is " + std::string(to_string(seq.scale)) +
                              "-scale but the branch expects " + std::string(to_string(req->scale)));
      }
      result.provenance[source] = entry.audio_path ? "toy:" + *entry.audio_path : "toy:<memory>";
      result.by_source[source] = std::move(seq);
    }
  }
  return result;
}

}  // namespace hear::embeddings
