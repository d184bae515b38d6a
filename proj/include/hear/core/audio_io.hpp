// include/hear/core/audio_io.hpp

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
#include <span>
#include <vector>

#include "hear/core/types.hpp"

namespace hear {

/// Band-limited resampling with a Kaiser-windowed sinc kernel.
///
/// The output has round(n * out_rate / in_rate) samples. When the two rates
/// are equal the input is returned unchanged.
std::vector<double> resample(std::span<const double> input, double in_rate, double out_rate);

// Reads PCM16, PCM24 or float32 WAV (plain or WAVE_FORMAT_EXTENSIBLE),
// downmixes to mono and resamples to kCanonicalSampleRate.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

enum class WavEncoding { kPcm16, kPcm24, kFloat32 };

// Channels are interleaved in `samples`. No resampling.
std::vector<std::uint8_t> encode_wav(std::span<const double> samples, int sample_rate_hz,
                                     int channels, WavEncoding encoding);
void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace hear
