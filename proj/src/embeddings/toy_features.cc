// src/embeddings/toy_features.cc

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

#include "hear/embeddings/toy_features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "hear/core/error.hpp"

namespace hear::embeddings {

namespace {

// FFTW's planner is not re-entrant; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  // |X_k|^2 for k = 0..n/2.
  void power(std::vector<double>& out) {
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank(std::size_t n_mels, int sample_rate_hz) {
  const double f_max = std::min(kMelMaxHz, sample_rate_hz / 2.0);
  const double m_max = hz_to_mel(f_max);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(m_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  const std::size_t bins = kStftWindow / 2 + 1;
  std::vector<std::vector<double>> bank(n_mels, std::vector<double>(bins, 0.0));
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(kStftWindow);
      if (f > lo && f < center) {
        bank[m][k] = (f - lo) / (center - lo);
      } else if (f >= center && f < hi) {
        bank[m][k] = (hi - f) / (hi - center);
      }
    }
  }
  return bank;
}

EmbeddingSequence toy_logmel(const AudioClip& clip, std::size_t n_mels, double hop_s) {
  clip.validate();
  if (n_mels == 0) throw ValidationError("toy_logmel: n_mels must be positive");
  const auto hop = static_cast<std::size_t>(std::llround(hop_s * clip.sample_rate_hz));
  if (hop == 0) throw ValidationError("toy_logmel: hop rounds to zero samples");
  if (clip.size() < hop) {
    throw ValidationError("toy_logmel: clip of " + std::to_string(clip.size()) +
                          " samples is shorter than one hop (" + std::to_string(hop) + ")");
  }
  const auto bank = mel_filterbank(n_mels, clip.sample_rate_hz);
  std::vector<double> window(kStftWindow);
  for (std::size_t i = 0; i < kStftWindow; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / kStftWindow);
  }

  EmbeddingSequence seq;
  seq.source_id = std::string(kToyLogmelSource);
  seq.scale = Scale::kSegment;
  seq.num_frames = (clip.size() - 1) / hop + 1;
  seq.dim = n_mels;
  seq.frame_rate_hz = static_cast<double>(clip.sample_rate_hz) / static_cast<double>(hop);
  seq.frames.resize(seq.num_frames * n_mels);

  RealFft fft(kStftWindow);
  std::vector<double> power;
  const auto n = static_cast<std::ptrdiff_t>(clip.size());
  const auto half = static_cast<std::ptrdiff_t>(kStftWindow / 2);
  for (std::size_t t = 0; t < seq.num_frames; ++t) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t * hop) - half;
    double* in = fft.input();
    for (std::size_t i = 0; i < kStftWindow; ++i) {
      const std::ptrdiff_t s = start + static_cast<std::ptrdiff_t>(i);
      in[i] = (s >= 0 && s < n) ? clip.samples[static_cast<std::size_t>(s)] * window[i] : 0.0;
    }
    fft.power(power);
    for (std::size_t m = 0; m < n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += bank[m][k] * power[k];
      seq.at(t, m) = std::log1p(e);
    }
  }
  return seq;
}

EmbeddingSequence toy_track_stats(const EmbeddingSequence& seq, double window_s) {
  seq.validate();
  if (!(window_s > 0.0)) throw ValidationError("toy_track_stats: window must be positive");
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_s * seq.frame_rate_hz)));
  EmbeddingSequence out;
  out.source_id = std::string(kToyTrackSource);
  out.scale = Scale::kTrack;
  out.num_frames = (seq.num_frames + w - 1) / w;
  out.dim = 2 * seq.dim;
  out.frame_rate_hz = seq.frame_rate_hz / static_cast<double>(w);
  out.frames.assign(out.num_frames * out.dim, 0.0);
  for (std::size_t k = 0; k < out.num_frames; ++k) {
    const std::size_t begin = k * w;
    const std::size_t end = std::min(seq.num_frames, begin + w);
    const double count = static_cast<double>(end - begin);
    for (std::size_t d = 0; d < seq.dim; ++d) {
      double mean = 0.0;
      for (std::size_t t = begin; t < end; ++t) mean += seq.at(t, d);
      mean /= count;
      double var = 0.0;
      for (std::size_t t = begin; t < end; ++t) {
        const double c = seq.at(t, d) - mean;
        var += c * c;
      }
      out.at(k, d) = mean;
      out.at(k, seq.dim + d) = std::sqrt(var / count);
    }
  }
  return out;
}

bool is_toy_source(std::string_view source_id) {
  return source_id == kToyLogmelSource || source_id == kToyTrackSource;
}

}  // namespace hear::embeddings
