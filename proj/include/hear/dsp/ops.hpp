// include/hear/dsp/ops.hpp

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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hear/core/types.hpp"
#include "hear/dsp/biquad.hpp"

namespace hear::dsp {

// Fixed parametric EQ layout: log-spaced centers, Q = 1.
inline constexpr std::array<double, 7> kEqCentersHz = {60, 150, 400, 1000, 2400, 6000, 15000};
inline constexpr double kEqQ = 1.0;

/// Speed change by band-limited resampling, played back at the original rate.
///
/// The result lasts duration / rate and every frequency scales by `rate`
/// (at 1.01 this is a +17.2 cent pitch change). rate must lie in [0.9, 1.1].
AudioClip time_stretch(const AudioClip& clip, double rate);

// Non-circular shift: positive values delay (zeros in front, tail truncated).
AudioClip time_shift(const AudioClip& clip, double shift_s);

/// Pitch change by 2^(cents/1200) with duration preserved.
///
/// The clip is resampled by the pitch ratio, then restored to its original
/// length with waveform-similarity overlap-add, which changes duration without
/// moving spectral peaks.
AudioClip pitch_shift(const AudioClip& clip, double cents);

// Duration change by `factor` (output length round(n * factor)), pitch kept.
std::vector<double> wsola_stretch(std::span<const double> input, double factor,
                                  std::size_t out_length);

AudioClip gain(const AudioClip& clip, double gain_db);

AudioClip butterworth_filter(const AudioClip& clip, FilterMode mode, double cutoff_hz);

// A band whose center sits at or above Nyquist cannot be realised and is bypassed.
AudioClip parametric_eq(const AudioClip& clip, std::span<const double> band_gains_db);
bool eq_band_realisable(std::size_t band, int sample_rate_hz);

// Adds white Gaussian noise scaled to exactly signal_rms * 10^(-snr_db / 20).
// Silent clips and snr_db = +inf are returned unchanged.
AudioClip add_noise_snr(const AudioClip& clip, double snr_db, std::uint64_t seed);

double rms(std::span<const double> x);

}  // namespace hear::dsp
