// src/core/types.cc

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

#include "hear/core/types.hpp"

#include <cmath>

#include "hear/core/error.hpp"

namespace hear {

void AudioClip::validate() const {
  if (samples.empty()) throw ValidationError("audio clip has no samples");
  if (sample_rate_hz <= 0) {
    throw ValidationError("audio clip sample rate must be positive, got " +
                          std::to_string(sample_rate_hz));
  }
}

std::string_view to_string(Scale scale) {
  return scale == Scale::kSegment ? "segment" : "track";
}

Scale scale_from_string(std::string_view name) {
  if (name == "segment") return Scale::kSegment;
  if (name == "track") return Scale::kTrack;
  throw ValidationError("unknown scale '" + std::string(name) + "'");
}

void EmbeddingSequence::validate() const {
  if (num_frames == 0 || dim == 0) {
    throw ValidationError("embedding '" + source_id + "' must have T >= 1 and D >= 1");
  }
  if (frames.size() != num_frames * dim) {
    throw ValidationError("embedding '" + source_id + "' has " + std::to_string(frames.size()) +
                          " values, expected T*D = " + std::to_string(num_frames * dim));
  }
  if (!(frame_rate_hz > 0.0) || !std::isfinite(frame_rate_hz)) {
    throw ValidationError("embedding '" + source_id + "' frame rate must be positive");
  }
  for (double v : frames) {
    if (!std::isfinite(v)) {
      throw ValidationError("embedding '" + source_id + "' contains a non-finite value");
    }
  }
}

std::vector<std::string> default_dimension_names(std::size_t num_dims) {
  if (num_dims == 1) return {"overall"};
  std::vector<std::string> names;
  for (std::size_t i = 0; i < num_dims; ++i) names.push_back("dim" + std::to_string(i + 1));
  return names;
}

std::vector<std::string> ScoreVector::names() const {
  return dimension_names.empty() ? default_dimension_names(values.size()) : dimension_names;
}

void ScoreVector::validate() const {
  if (values.size() != 1 && values.size() != 5) {
    throw ValidationError("score vector must have 1 or 5 values, got " +
                          std::to_string(values.size()));
  }
  if (!dimension_names.empty() && dimension_names.size() != values.size()) {
    throw ValidationError("score vector has " + std::to_string(values.size()) + " values but " +
                          std::to_string(dimension_names.size()) + " dimension names");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("score vector contains a non-finite value");
  }
}

std::size_t track_output_dim(int track) {
  if (track == 1) return 1;
  if (track == 2) return 5;
  throw ValidationError("track must be 1 or 2, got " + std::to_string(track));
}

}  // namespace hear
