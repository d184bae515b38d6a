// src/dsp/biquad.cc

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

#include "hear/dsp/biquad.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "hear/core/error.hpp"

namespace hear::dsp {

double Biquad::magnitude(double freq_hz, double sample_rate_hz) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

double Biquad::magnitude_db(double freq_hz, double sample_rate_hz) const {
  return 20.0 * std::log10(magnitude(freq_hz, sample_rate_hz));
}

Biquad design_butterworth(FilterMode mode, double cutoff_hz, double sample_rate_hz) {
  if (!(cutoff_hz > 0.0) || cutoff_hz >= sample_rate_hz / 2.0) {
    throw ValidationError("butterworth cutoff " + std::to_string(cutoff_hz) +
                          " Hz must lie in (0, " + std::to_string(sample_rate_hz / 2.0) + ")");
  }
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / std::numbers::sqrt2;  // Q = 1/sqrt 2
  const double a0 = 1.0 + alpha;
  Biquad s;
  if (mode == FilterMode::kLowpass) {
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
    s.b2 = s.b0;
  } else {
    s.b0 = (1.0 + cw) / 2.0 / a0;
    s.b1 = -(1.0 + cw) / a0;
    s.b2 = s.b0;
  }
  s.a1 = -2.0 * cw / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

Biquad design_peaking(double center_hz, double q, double gain_db, double sample_rate_hz) {
  if (!(center_hz > 0.0) || center_hz >= sample_rate_hz / 2.0) {
    throw ValidationError("peaking center " + std::to_string(center_hz) + " Hz above Nyquist");
  }
  const double a = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * std::numbers::pi * center_hz / sample_rate_hz;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha / a;
  Biquad s;
  s.b0 = (1.0 + alpha * a) / a0;
  s.b1 = -2.0 * cw / a0;
  s.b2 = (1.0 - alpha * a) / a0;
  s.a1 = -2.0 * cw / a0;
  s.a2 = (1.0 - alpha / a) / a0;
  return s;
}

std::vector<double> apply_biquad(const Biquad& f, std::span<const double> input) {
  std::vector<double> out(input.size());
  double z1 = 0.0, z2 = 0.0;
  for (std::size_t n = 0; n < input.size(); ++n) {
    const double x = input[n];
    const double y = f.b0 * x + z1;
    z1 = f.b1 * x - f.a1 * y + z2;
    z2 = f.b2 * x - f.a2 * y;
    out[n] = y;
  }
  return out;
}

}  // namespace hear::dsp
