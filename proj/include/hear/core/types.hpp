// include/hear/core/types.hpp

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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hear {

inline constexpr int kCanonicalSampleRate = 24000;

/// Mono waveform. Amplitudes are nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  // Throws ValidationError when empty or the rate is not positive.
  void validate() const;
};

enum class Scale : std::uint8_t { kSegment = 0, kTrack = 1 };

std::string_view to_string(Scale scale);
Scale scale_from_string(std::string_view name);

/// Frame matrix (T x D, row-major) from one feature source at one scale.
struct EmbeddingSequence {
  std::string source_id;
  Scale scale = Scale::kSegment;
  std::size_t num_frames = 0;
  std::size_t dim = 0;
  std::vector<double> frames;
  double frame_rate_hz = 1.0;

  double at(std::size_t t, std::size_t d) const { return frames[t * dim + d]; }
  double& at(std::size_t t, std::size_t d) { return frames[t * dim + d]; }
  void validate() const;

  friend bool operator==(const EmbeddingSequence&, const EmbeddingSequence&) = default;
};

/// One (Track 1) or five (Track 2) aesthetic scores for a song.
struct ScoreVector {
  std::vector<double> values;
  std::vector<std::string> dimension_names;

  std::size_t size() const { return values.size(); }
  // Fills in default names when none were supplied.
  std::vector<std::string> names() const;
  void validate() const;

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

std::vector<std::string> default_dimension_names(std::size_t num_dims);

// Output dimension implied by a challenge track (1 -> 1, 2 -> 5).
std::size_t track_output_dim(int track);

}  // namespace hear
