// tests/support/spectrum.cc

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

#include "spectrum.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>

namespace hear::testing {

double dominant_frequency(std::span<const double> x, double sample_rate_hz) {
  std::size_t n = 1;
  while (n < 8 * x.size()) n <<= 1;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  for (std::size_t i = 0; i < n; ++i) in[i] = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(x.size() - 1));
    in[i] = x[i] * w;
  }
  fftw_execute(plan);
  std::vector<double> power(n / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);

  std::size_t best = 1;
  for (std::size_t k = 1; k + 1 < power.size(); ++k) {
    if (power[k] > power[best]) best = k;
  }
  // Parabola through log power at the three bins around the peak.
  const double a = std::log(power[best - 1]), b = std::log(power[best]), c = std::log(power[best + 1]);
  const double offset = 0.5 * (a - c) / (a - 2.0 * b + c);
  return (static_cast<double>(best) + offset) * sample_rate_hz / static_cast<double>(n);
}

std::vector<double> sine(double freq_hz, double duration_s, double sample_rate_hz, double amplitude) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / sample_rate_hz);
  }
  return x;
}

}  // namespace hear::testing
