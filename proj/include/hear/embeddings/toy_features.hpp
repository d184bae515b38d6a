// include/hear/embeddings/toy_features.hpp

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

#include <string_view>
#include <vector>

#include "hear/core/types.hpp"

namespace hear::embeddings {

inline constexpr std::string_view kToyLogmelSource = "toy-logmel";
inline constexpr std::string_view kToyTrackSource = "toy-track";
inline constexpr std::size_t kStftWindow = 1024;
inline constexpr double kMelMaxHz = 12000.0;

struct FeatureConfig {
  std::size_t n_mels = 64;
  double hop_s = 0.02;
  double track_window_s = 5.0;
};

double hz_to_mel(double hz);  // HTK: 2595 log10(1 + f / 700)
double mel_to_hz(double mel);

// [n_mels, kStftWindow / 2 + 1] triangular weights, edges evenly spaced in mel
// over [0, min(12 kHz, sr / 2)].
std::vector<std::vector<double>> mel_filterbank(std::size_t n_mels, int sample_rate_hz);

/// Log-mel frames: Hann STFT (1024 window, frames centered on multiples of the
/// hop, zero padded), mel filterbank, log(1 + power). One frame per hop that
/// starts inside the clip, so T = floor((N - 1) / hop) + 1.
EmbeddingSequence toy_logmel(const AudioClip& clip, std::size_t n_mels = 64, double hop_s = 0.02);

/// Per non-overlapping window of round(window_s * frame_rate) frames: the
/// frame mean followed by the population standard deviation (dimension 2D).
/// The final window may be partial.
EmbeddingSequence toy_track_stats(const EmbeddingSequence& seq, double window_s = 5.0);

bool is_toy_source(std::string_view source_id);

}  // namespace hear::embeddings
