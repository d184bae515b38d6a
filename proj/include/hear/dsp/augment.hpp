// include/hear/dsp/augment.hpp

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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hear/core/types.hpp"

namespace hear::dsp {

// Chain order is fixed; the enum value is also the op index used for seeding.
enum class AugmentOp : std::uint8_t {
  kTimeStretch = 0,
  kTimeShift,
  kPitchShift,
  kGain,
  kHighpass,
  kLowpass,
  kParametricEq,
  kGaussianNoise,
};
inline constexpr std::size_t kNumAugmentOps = 8;

std::string_view op_name(AugmentOp op);
AugmentOp op_from_name(std::string_view name);
AugmentOp op_at(std::size_t index);

struct ParamRange {
  double low = 0.0;
  double high = 0.0;
};

struct OpSetting {
  ParamRange range;
  double probability = 0.0;
};

/// Per-op ranges and firing probabilities. Defaults are the conservative
/// training settings (stretch 0.99-1.01 p=.4, shift +-0.5 s p=.4, pitch
/// +-10 cents p=.5, gain +-2 dB p=.9, HPF 80-120 Hz p=.3, LPF 15-18 kHz p=.3,
/// 7-band EQ +-3 dB p=.3, noise 30-50 dB SNR p=.25).
struct AugmentConfig {
  std::array<OpSetting, kNumAugmentOps> ops = {{
      {{0.99, 1.01}, 0.4},
      {{-0.5, 0.5}, 0.4},
      {{-10.0, 10.0}, 0.5},
      {{-2.0, 2.0}, 0.9},
      {{80.0, 120.0}, 0.3},
      {{15000.0, 18000.0}, 0.3},
      {{-3.0, 3.0}, 0.3},
      {{30.0, 50.0}, 0.25},
  }};
  std::uint64_t seed = 0;
  std::size_t copies_per_clip = 1;

  OpSetting& setting(AugmentOp op) { return ops[static_cast<std::size_t>(op)]; }
  const OpSetting& setting(AugmentOp op) const { return ops[static_cast<std::size_t>(op)]; }
  void disable(AugmentOp op) { setting(op).probability = 0.0; }
  void validate() const;
};

/// One op's random draw. `params` holds one value, or seven band gains for EQ.
struct OpDraw {
  AugmentOp op = AugmentOp::kGain;
  bool fired = false;
  bool applied = false;
  std::string note;  // why a fired op was bypassed
  std::vector<double> params;
  std::uint64_t noise_seed = 0;
};

struct AugmentResult {
  AudioClip clip;
  std::vector<OpDraw> draws;
};

// Seed for one augmented copy of one clip.
std::uint64_t clip_seed(std::string_view clip_id, std::uint64_t copy_index);

// Gate and parameters for one op; depends only on (cfg.seed, clip_seed, op).
OpDraw draw_op(const AugmentConfig& cfg, std::uint64_t clip_seed, AugmentOp op);

// Applies one op with the given parameters (ignores the gate).
AudioClip apply_op(const AudioClip& clip, const OpDraw& draw);

// Runs the eight-op chain and hard-clips the result to [-1, 1].
AugmentResult augment_clip(const AudioClip& clip, const AugmentConfig& cfg, std::uint64_t clip_seed);
AudioClip apply_pipeline(const AudioClip& clip, const AugmentConfig& cfg, std::uint64_t clip_seed);

void hard_clip(AudioClip& clip);

nlohmann::json to_json(const AugmentConfig& cfg);
AugmentConfig augment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OpDraw& draw);

}  // namespace hear::dsp
