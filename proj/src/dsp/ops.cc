// src/dsp/ops.cc

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

#include "hear/dsp/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hear/core/audio_io.hpp"
#include "hear/core/error.hpp"

namespace hear::dsp {

namespace {

AudioClip with_samples(const AudioClip& like, std::vector<double> samples) {
  AudioClip out;
  out.sample_rate_hz = like.sample_rate_hz;
  out.samples = std::move(samples);
  return out;
}

constexpr std::size_t kWsolaFrame = 1024;
constexpr std::size_t kWsolaHop = kWsolaFrame / 2;
constexpr std::ptrdiff_t kWsolaSearch = 256;

}  // namespace

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

AudioClip time_stretch(const AudioClip& clip, double rate) {
  clip.validate();
  if (!(rate >= 0.9 && rate <= 1.1)) {
    throw ValidationError("time_stretch rate " + std::to_string(rate) + " outside [0.9, 1.1]");
  }
  if (rate == 1.0) return clip;
  // Reading the input `rate` samples per output sample shortens it by 1/rate.
  return with_samples(clip, resample(clip.samples, rate, 1.0));
}

AudioClip time_shift(const AudioClip& clip, double shift_s) {
  clip.validate();
  if (std::abs(shift_s) > clip.duration_s()) {
    throw ValidationError("time_shift of " + std::to_string(shift_s) +
                          " s exceeds clip duration " + std::to_string(clip.duration_s()) + " s");
  }
  const auto n = static_cast<std::ptrdiff_t>(clip.size());
  const auto shift = static_cast<std::ptrdiff_t>(std::llround(shift_s * clip.sample_rate_hz));
  std::vector<double> out(clip.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t src = i - shift;
    if (src >= 0 && src < n) out[static_cast<std::size_t>(i)] = clip.samples[static_cast<std::size_t>(src)];
  }
  return with_samples(clip, std::move(out));
}

std::vector<double> wsola_stretch(std::span<const double> input, double factor,
                                  std::size_t out_length) {
  if (!(factor > 0.0)) throw ValidationError("wsola factor must be positive");
  const auto n_in = static_cast<std::ptrdiff_t>(input.size());
  auto sample = [&](std::ptrdiff_t i) {
    return (i >= 0 && i < n_in) ? input[static_cast<std::size_t>(i)] : 0.0;
  };
  std::vector<double> window(kWsolaFrame);
  for (std::size_t i = 0; i < kWsolaFrame; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / kWsolaFrame);
  }
  const double analysis_hop = static_cast<double>(kWsolaHop) / factor;
  std::vector<double> acc(out_length + kWsolaFrame, 0.0);
  std::vector<double> weight(out_length + kWsolaFrame, 0.0);

  std::ptrdiff_t prev = 0;
  for (std::size_t m = 0; m * kWsolaHop < out_length; ++m) {
    std::ptrdiff_t start = 0;
    if (m > 0) {
      const auto nominal = static_cast<std::ptrdiff_t>(std::llround(static_cast<double>(m) * analysis_hop));
      const std::ptrdiff_t natural = prev + static_cast<std::ptrdiff_t>(kWsolaHop);
      // Pick the candidate whose waveform best continues the previous frame.
      auto score = [&](std::ptrdiff_t c) {
        double s = 0.0;
        for (std::size_t i = 0; i < kWsolaFrame; ++i) {
          s += sample(c + static_cast<std::ptrdiff_t>(i)) * sample(natural + static_cast<std::ptrdiff_t>(i));
        }
        return s;
      };
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, nominal - kWsolaSearch);
      const std::ptrdiff_t base = std::max<std::ptrdiff_t>(lo, nominal);
      start = base;
      double best = score(base);
      for (std::ptrdiff_t c = lo; c <= nominal + kWsolaSearch; ++c) {
        if (c == base) continue;
        const double s = score(c);
        if (s > best) {
          best = s;
          start = c;
        }
      }
    }
    const std::size_t out_pos = m * kWsolaHop;
    for (std::size_t i = 0; i < kWsolaFrame; ++i) {
      acc[out_pos + i] += window[i] * sample(start + static_cast<std::ptrdiff_t>(i));
      weight[out_pos + i] += window[i];
    }
    prev = start;
  }
  std::vector<double> out(out_length);
  for (std::size_t n = 0; n < out_length; ++n) {
    out[n] = weight[n] > 1e-9 ? acc[n] / weight[n] : 0.0;
  }
  return out;
}

AudioClip pitch_shift(const AudioClip& clip, double cents) {
  clip.validate();
  if (!(std::abs(cents) <= 100.0)) {
    throw ValidationError("pitch_shift of " + std::to_string(cents) + " cents outside [-100, 100]");
  }
  if (cents == 0.0) return clip;
  const double ratio = std::exp2(cents / 1200.0);
  // Reading `ratio` input samples per output sample raises every frequency by ratio.
  const auto raised = resample(clip.samples, ratio, 1.0);
  const double factor = static_cast<double>(clip.size()) / static_cast<double>(raised.size());
  return with_samples(clip, wsola_stretch(raised, factor, clip.size()));
}

AudioClip gain(const AudioClip& clip, double gain_db) {
  clip.validate();
  if (!(std::abs(gain_db) <= 24.0)) {
    throw ValidationError("gain of " + std::to_string(gain_db) + " dB outside [-24, 24]");
  }
  const double factor = std::pow(10.0, gain_db / 20.0);
  AudioClip out = clip;
  for (auto& s : out.samples) s *= factor;
  return out;
}

AudioClip butterworth_filter(const AudioClip& clip, FilterMode mode, double cutoff_hz) {
  clip.validate();
  const auto section = design_butterworth(mode, cutoff_hz, clip.sample_rate_hz);
  return with_samples(clip, apply_biquad(section, clip.samples));
}

bool eq_band_realisable(std::size_t band, int sample_rate_hz) {
  return kEqCentersHz.at(band) < sample_rate_hz / 2.0;
}

AudioClip parametric_eq(const AudioClip& clip, std::span<const double> band_gains_db) {
  clip.validate();
  if (band_gains_db.size() != kEqCentersHz.size()) {
    throw ValidationError("parametric_eq expects " + std::to_string(kEqCentersHz.size()) +
                          " band gains, got " + std::to_string(band_gains_db.size()));
  }
  for (double g : band_gains_db) {
    if (!(std::abs(g) <= 12.0)) {
      throw ValidationError("parametric_eq band gain " + std::to_string(g) + " dB outside [-12, 12]");
    }
  }
  AudioClip out = clip;
  for (std::size_t b = 0; b < kEqCentersHz.size(); ++b) {
    if (band_gains_db[b] == 0.0 || !eq_band_realisable(b, clip.sample_rate_hz)) continue;
    const auto section = design_peaking(kEqCentersHz[b], kEqQ, band_gains_db[b], clip.sample_rate_hz);
    out.samples = apply_biquad(section, out.samples);
  }
  return out;
}

AudioClip add_noise_snr(const AudioClip& clip, double snr_db, std::uint64_t seed) {
  clip.validate();
  if (std::isinf(snr_db) && snr_db > 0) return clip;
  if (!std::isfinite(snr_db)) throw ValidationError("add_noise_snr: SNR must be finite or +inf");
  const double signal_rms = rms(clip.samples);
  if (signal_rms == 0.0) return clip;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> noise(clip.size());
  for (auto& v : noise) v = normal(gen);
  const double noise_rms = rms(noise);
  if (noise_rms == 0.0) return clip;
  const double scale = signal_rms * std::pow(10.0, -snr_db / 20.0) / noise_rms;
  AudioClip out = clip;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += scale * noise[i];
  return out;
}

}  // namespace hear::dsp
