// src/core/audio_io.cc

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

#include "hear/core/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "hear/core/byte_io.hpp"
#include "hear/core/embedding_io.hpp"
#include "hear/core/error.hpp"

namespace hear {

namespace {

// Kernel half-width in zero crossings, table oversampling, Kaiser beta.
constexpr int kZeroCrossings = 32;
constexpr int kTableOversample = 512;
constexpr double kKaiserBeta = 8.6;

// h(x) = sinc(x) * kaiser(x / kZeroCrossings), tabulated for x in [0, kZeroCrossings].
const std::vector<double>& sinc_table() {
  static const std::vector<double> table = [] {
    const int n = kZeroCrossings * kTableOversample + 2;
    std::vector<double> t(n);
    const double denom = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / kTableOversample;
      const double r = std::min(1.0, x / kZeroCrossings);
      const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / denom;
      const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      t[i] = sinc * window;
    }
    t[n - 1] = t[n - 2] = 0.0;
    return t;
  }();
  return table;
}

double kernel(double x) {
  x = std::abs(x);
  if (x >= kZeroCrossings) return 0.0;
  const auto& t = sinc_table();
  const double pos = x * kTableOversample;
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return t[i] + frac * (t[i + 1] - t[i]);
}

}  // namespace

std::vector<double> resample(std::span<const double> input, double in_rate, double out_rate) {
  if (!(in_rate > 0.0) || !(out_rate > 0.0)) {
    throw ValidationError("resample rates must be positive");
  }
  if (in_rate == out_rate) return {input.begin(), input.end()};
  const auto n_in = static_cast<std::ptrdiff_t>(input.size());
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(input.size()) * out_rate / in_rate));
  const double step = in_rate / out_rate;
  // Anti-aliasing cutoff relative to the input Nyquist when decimating.
  const double cutoff = std::min(1.0, out_rate / in_rate);
  const double half_width = kZeroCrossings / cutoff;
  std::vector<double> out(n_out);
  for (std::size_t n = 0; n < n_out; ++n) {
    const double t = static_cast<double>(n) * step;
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(t - half_width)));
    const auto hi = std::min<std::ptrdiff_t>(n_in - 1, static_cast<std::ptrdiff_t>(std::floor(t + half_width)));
    double acc = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      acc += input[static_cast<std::size_t>(k)] * kernel(cutoff * (t - static_cast<double>(k)));
    }
    out[n] = acc * cutoff;
  }
  return out;
}

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "wav");
  if (r.get_string(4) != "RIFF") throw ValidationError("wav: missing RIFF header");
  r.get<std::uint32_t>();
  if (r.get_string(4) != "WAVE") throw ValidationError("wav: missing WAVE tag");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;
  while (!r.done() && !have_data) {
    if (r.remaining() < 8) break;
    const std::string id = r.get_string(4);
    const auto size = r.get<std::uint32_t>();
    if (id == "data") {
      if (size > r.remaining()) {
        throw ValidationError("wav: truncated data chunk (declared " + std::to_string(size) +
                              " bytes, have " + std::to_string(r.remaining()) + ")");
      }
      data = r.get_span(size);
      have_data = true;
      break;
    }
    auto body = r.get_span(size);
    if (size % 2 == 1 && !r.done()) r.get<std::uint8_t>();
    if (id == "fmt ") {
      ByteReader f(body, "wav fmt chunk");
      format = f.get<std::uint16_t>();
      channels = f.get<std::uint16_t>();
      rate = f.get<std::uint32_t>();
      f.get<std::uint32_t>();
      f.get<std::uint16_t>();
      bits = f.get<std::uint16_t>();
      if (format == 0xFFFE) {
        f.get<std::uint16_t>();  // cbSize
        f.get<std::uint16_t>();  // valid bits
        f.get<std::uint32_t>();  // channel mask
        format = f.get<std::uint16_t>();  // leading bytes of the sub-format GUID
      }
      have_fmt = true;
    }
  }
  if (!have_fmt) throw ValidationError("wav: missing fmt chunk");
  if (!have_data) throw ValidationError("wav: truncated file, no data chunk");
  if (channels == 0 || rate == 0) throw ValidationError("wav: zero channels or sample rate");

  const bool pcm16 = format == 1 && bits == 16;
  const bool pcm24 = format == 1 && bits == 24;
  const bool f32 = format == 3 && bits == 32;
  if (!pcm16 && !pcm24 && !f32) {
    throw ValidationError("wav: unsupported codec (format tag " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits)");
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(bits / 8) * channels;
  if (data.size() % frame_bytes != 0) throw ValidationError("wav: truncated final sample frame");
  const std::size_t num_frames = data.size() / frame_bytes;
  if (num_frames == 0) throw ValidationError("wav: no samples");

  std::vector<double> mono(num_frames, 0.0);
  const std::uint8_t* p = data.data();
  for (std::size_t i = 0; i < num_frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      if (pcm16) {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        acc += v / 32768.0;
        p += 2;
      } else if (pcm24) {
        std::int32_t v = static_cast<std::int32_t>(p[0]) | (static_cast<std::int32_t>(p[1]) << 8) |
                         (static_cast<std::int32_t>(static_cast<std::int8_t>(p[2])) << 16);
        acc += v / 8388608.0;
        p += 3;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        acc += v;
        p += 4;
      }
    }
    mono[i] = acc / channels;
  }
  AudioClip clip;
  clip.sample_rate_hz = kCanonicalSampleRate;
  clip.samples = resample(mono, rate, kCanonicalSampleRate);
  if (clip.samples.empty()) throw ValidationError("wav: too short to resample");
  return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_wav(bytes);
  } catch (const ValidationError& ex) {
    throw ValidationError(path.string() + ": " + ex.what());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const double> samples, int sample_rate_hz,
                                     int channels, WavEncoding encoding) {
  if (channels <= 0 || sample_rate_hz <= 0) throw ValidationError("wav: bad channels/rate");
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : encoding == WavEncoding::kPcm24 ? 24 : 32;
  const std::uint16_t tag = encoding == WavEncoding::kFloat32 ? 3 : 1;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * (bits / 8));
  ByteWriter w;
  w.put_bytes("RIFF");
  w.put<std::uint32_t>(36 + data_bytes);
  w.put_bytes("WAVE");
  w.put_bytes("fmt ");
  w.put<std::uint32_t>(16);
  w.put<std::uint16_t>(tag);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(channels));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sample_rate_hz));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sample_rate_hz * channels * (bits / 8)));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(channels * (bits / 8)));
  w.put<std::uint16_t>(bits);
  w.put_bytes("data");
  w.put<std::uint32_t>(data_bytes);
  for (double s : samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    if (encoding == WavEncoding::kPcm16) {
      w.put<std::int16_t>(static_cast<std::int16_t>(std::lround(std::min(c * 32768.0, 32767.0))));
    } else if (encoding == WavEncoding::kPcm24) {
      const auto v = static_cast<std::int32_t>(std::lround(std::min(c * 8388608.0, 8388607.0)));
      w.put<std::uint8_t>(static_cast<std::uint8_t>(v & 0xFF));
      w.put<std::uint8_t>(static_cast<std::uint8_t>((v >> 8) & 0xFF));
      w.put<std::uint8_t>(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    } else {
      // Float payloads are written unclipped.
      w.put<float>(static_cast<float>(s));
    }
  }
  return std::move(w.bytes());
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path, WavEncoding encoding) {
  clip.validate();
  write_file_bytes(path, encode_wav(clip.samples, clip.sample_rate_hz, 1, encoding));
}

}  // namespace hear
