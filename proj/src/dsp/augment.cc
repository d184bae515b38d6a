// src/dsp/augment.cc

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

#include "hear/dsp/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hear/core/error.hpp"
#include "hear/core/seed.hpp"
#include "hear/dsp/ops.hpp"

namespace hear::dsp {

namespace {

constexpr std::array<std::string_view, kNumAugmentOps> kOpNames = {
    "time_stretch", "time_shift", "pitch_shift",   "gain",
    "highpass",     "lowpass",    "parametric_eq", "gaussian_noise"};

}  // namespace

std::string_view op_name(AugmentOp op) { return kOpNames[static_cast<std::size_t>(op)]; }

AugmentOp op_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumAugmentOps; ++i) {
    if (kOpNames[i] == name) return op_at(i);
  }
  throw ValidationError("unknown augmentation op '" + std::string(name) + "'");
}

AugmentOp op_at(std::size_t index) {
  if (index >= kNumAugmentOps) throw ValidationError("augmentation op index out of range");
  return static_cast<AugmentOp>(index);
}

void AugmentConfig::validate() const {
  for (std::size_t i = 0; i < kNumAugmentOps; ++i) {
    const auto& s = ops[i];
    if (!(s.probability >= 0.0 && s.probability <= 1.0)) {
      throw ValidationError(std::string(kOpNames[i]) + ": probability must lie in [0, 1]");
    }
    if (!(s.range.low <= s.range.high)) {
      throw ValidationError(std::string(kOpNames[i]) + ": range low must not exceed high");
    }
  }
  if (copies_per_clip < 1) throw ValidationError("copies_per_clip must be positive");
}

std::uint64_t clip_seed(std::string_view clip_id, std::uint64_t copy_index) {
  return derive_seed({hash_string(clip_id), copy_index});
}

OpDraw draw_op(const AugmentConfig& cfg, std::uint64_t clip_seed, AugmentOp op) {
  const auto& s = cfg.setting(op);
  std::mt19937_64 rng(derive_seed({cfg.seed, clip_seed, static_cast<std::uint64_t>(op)}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  OpDraw d;
  d.op = op;
  d.fired = unit(rng) < s.probability;
  auto draw_param = [&] { return s.range.low + (s.range.high - s.range.low) * unit(rng); };
  const std::size_t n = op == AugmentOp::kParametricEq ? kEqCentersHz.size() : 1;
  for (std::size_t i = 0; i < n; ++i) d.params.push_back(draw_param());
  if (op == AugmentOp::kGaussianNoise) d.noise_seed = rng();
  return d;
}

AudioClip apply_op(const AudioClip& clip, const OpDraw& d) {
  switch (d.op) {
    case AugmentOp::kTimeStretch:
      return time_stretch(clip, d.params.at(0));
    case AugmentOp::kTimeShift:
      return time_shift(clip, d.params.at(0));
    case AugmentOp::kPitchShift:
      return pitch_shift(clip, d.params.at(0));
    case AugmentOp::kGain:
      return gain(clip, d.params.at(0));
    case AugmentOp::kHighpass:
      return butterworth_filter(clip, FilterMode::kHighpass, d.params.at(0));
    case AugmentOp::kLowpass:
      return butterworth_filter(clip, FilterMode::kLowpass, d.params.at(0));
    case AugmentOp::kParametricEq:
      return parametric_eq(clip, d.params);
    case AugmentOp::kGaussianNoise:
      return add_noise_snr(clip, d.params.at(0), d.noise_seed);
  }
  return clip;
}

namespace {

// Reason a fired op cannot run on this clip, or empty when it can.
std::string bypass_reason(const AudioClip& clip, const OpDraw& d) {
  const double nyquist = clip.sample_rate_hz / 2.0;
  switch (d.op) {
    case AugmentOp::kHighpass:
    case AugmentOp::kLowpass:
      if (d.params[0] >= nyquist) return "cutoff at or above Nyquist";
      break;
    case AugmentOp::kTimeShift:
      if (std::abs(d.params[0]) > clip.duration_s()) return "shift exceeds clip duration";
      break;
    case AugmentOp::kGaussianNoise:
      if (rms(clip.samples) == 0.0) return "silent input";
      break;
    default:
      break;
  }
  return {};
}

}  // namespace

void hard_clip(AudioClip& clip) {
  for (auto& s : clip.samples) s = std::clamp(s, -1.0, 1.0);
}

AugmentResult augment_clip(const AudioClip& clip, const AugmentConfig& cfg, std::uint64_t seed) {
  clip.validate();
  cfg.validate();
  AugmentResult result;
  result.clip = clip;
  for (std::size_t i = 0; i < kNumAugmentOps; ++i) {
    OpDraw d = draw_op(cfg, seed, op_at(i));
    if (d.fired) {
      d.note = bypass_reason(result.clip, d);
      if (d.note.empty()) {
        result.clip = apply_op(result.clip, d);
        d.applied = true;
      }
    }
    result.draws.push_back(std::move(d));
  }
  hard_clip(result.clip);
  return result;
}

AudioClip apply_pipeline(const AudioClip& clip, const AugmentConfig& cfg, std::uint64_t seed) {
  return augment_clip(clip, cfg, seed).clip;
}

nlohmann::json to_json(const AugmentConfig& cfg) {
  nlohmann::json j;
  for (std::size_t i = 0; i < kNumAugmentOps; ++i) {
    j[std::string(kOpNames[i])] = {{"range", {cfg.ops[i].range.low, cfg.ops[i].range.high}},
                                   {"p", cfg.ops[i].probability}};
  }
  j["seed"] = cfg.seed;
  j["copies_per_clip"] = cfg.copies_per_clip;
  return j;
}

AugmentConfig augment_config_from_json(const nlohmann::json& j) {
  AugmentConfig cfg;
  for (std::size_t i = 0; i < kNumAugmentOps; ++i) {
    const std::string key(kOpNames[i]);
    if (!j.contains(key)) continue;
    const auto& o = j.at(key);
    if (o.contains("range")) {
      const auto r = o.at("range").get<std::vector<double>>();
      if (r.size() != 2) throw ValidationError(key + ": range must have two values");
      cfg.ops[i].range = {r[0], r[1]};
    }
    if (o.contains("p")) cfg.ops[i].probability = o.at("p").get<double>();
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("copies_per_clip")) cfg.copies_per_clip = j.at("copies_per_clip").get<std::size_t>();
  if (j.contains("disable")) {
    for (const auto& name : j.at("disable").get<std::vector<std::string>>()) {
      cfg.disable(op_from_name(name));
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const OpDraw& d) {
  nlohmann::json j = {{"op", std::string(op_name(d.op))},
                      {"fired", d.fired},
                      {"applied", d.applied},
                      {"params", d.params}};
  if (d.op == AugmentOp::kGaussianNoise) j["noise_seed"] = d.noise_seed;
  if (!d.note.empty()) j["note"] = d.note;
  return j;
}

}  // namespace hear::dsp
