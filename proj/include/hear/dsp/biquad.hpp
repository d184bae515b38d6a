// include/hear/dsp/biquad.hpp

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

#include <span>
#include <vector>

namespace hear::dsp {

/// Normalized second-order section (a0 == 1).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  // |H(e^{jw})| at frequency f for sample rate fs.
  double magnitude(double freq_hz, double sample_rate_hz) const;
  double magnitude_db(double freq_hz, double sample_rate_hz) const;
};

enum class FilterMode { kHighpass, kLowpass };

// Bilinear-transform Butterworth (Q = 1/sqrt 2) with the cutoff pre-warped.
Biquad design_butterworth(FilterMode mode, double cutoff_hz, double sample_rate_hz);

// Peaking EQ section; the gain at center_hz is exactly gain_db.
Biquad design_peaking(double center_hz, double q, double gain_db, double sample_rate_hz);

// Direct form II transposed, zero initial state.
std::vector<double> apply_biquad(const Biquad& section, std::span<const double> input);

}  // namespace hear::dsp
