// tests/test_dsp.cc

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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hear/core/error.hpp"
#include "hear/core/seed.hpp"
#include "hear/dsp/augment.hpp"
#include "hear/dsp/biquad.hpp"
#include "hear/dsp/ops.hpp"
#include "oracles.hpp"
#include "near.hpp"
#include "spectrum.hpp"

using namespace hear;
using namespace hear::dsp;

namespace {

AudioClip tone(double f, double dur, int sr = 24000, double amp = 0.5) {
  return {testing::sine(f, dur, sr, amp), sr};
}

double db(double ratio) { return 20.0 * std::log10(ratio); }

// RMS of y over x on the steady-state tail, skipping the filter transient.
double steady_gain_db(const AudioClip& in, const AudioClip& out, double skip_s) {
  const auto skip = static_cast<std::size_t>(skip_s * in.sample_rate_hz);
  std::span<const double> a(in.samples), b(out.samples);
  return db(rms(b.subspan(skip)) / rms(a.subspan(skip)));
}

// Analog Butterworth magnitude at the bilinear-warped frequency.
double butterworth_oracle_db(FilterMode mode, double f, double fc, double fs) {
  const double w = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
  const double w4 = w * w * w * w;
  const double mag = mode == FilterMode::kLowpass ? 1.0 / std::sqrt(1.0 + w4) : w * w / std::sqrt(1.0 + w4);
  return db(mag);
}

AugmentConfig all_probabilities(double p) {
  AugmentConfig cfg;
  for (auto& op : cfg.ops) op.probability = p;
  cfg.seed = 99;
  return cfg;
}

AudioClip music_like(int sr, double dur) {
  std::vector<double> x(static_cast<std::size_t>(sr * dur));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    x[i] = 0.3 * std::sin(2 * std::numbers::pi * 220 * t) + 0.2 * std::sin(2 * std::numbers::pi * 1330 * t) +
           0.1 * std::sin(2 * std::numbers::pi * 5100 * t);
  }
  return {x, sr};
}

}  // namespace

TEST_CASE("time_stretch") {
  SUBCASE("rate 1 is the identity") {
    const auto c = tone(500, 1.0);
    const auto out = time_stretch(c, 1.0);
    REQUIRE(out.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) REQUIRE(std::abs(out.samples[i] - c.samples[i]) <= 1e-6);
  }
  SUBCASE("length") {
    AudioClip c{std::vector<double>(240000, 0.1), 24000};
    const auto out = time_stretch(c, 1.01);
    CHECK(std::abs(static_cast<long>(out.size()) - 237624) <= 1);
    for (double rate : {0.9, 0.99, 1.05, 1.1}) {
      const auto o = time_stretch(c, rate);
      CHECK(std::abs(static_cast<double>(o.size()) - std::round(240000 / rate)) <= 1.0);
    }
  }
  SUBCASE("frequency scales with the rate") {
    const auto out = time_stretch(tone(1000, 2.0), 1.01);
    const double f = testing::dominant_frequency(out.samples, 24000);
    CHECK_NEAR(f, 1010.0, 2.0);
  }
  SUBCASE("guard") {
    CHECK_THROWS_AS(time_stretch(tone(100, 0.1), 1.2), ValidationError);
    CHECK_THROWS_AS(time_stretch(tone(100, 0.1), 0.89), ValidationError);
  }
}

TEST_CASE("time_shift") {
  const auto c = tone(300, 1.0);
  CHECK(time_shift(c, 0.0).samples == c.samples);

  const auto delayed = time_shift(c, 0.5);
  REQUIRE(delayed.size() == c.size());
  for (std::size_t i = 0; i < 12000; ++i) REQUIRE(delayed.samples[i] == 0.0);
  for (std::size_t i = 12000; i < c.size(); ++i) REQUIRE(delayed.samples[i] == c.samples[i - 12000]);

  // Hand composition: the delay pushes the last 2400 samples off the end and the advance
  // brings everything else back, so only the tail is zeroed.
  const auto back = time_shift(time_shift(c, 0.1), -0.1);
  std::vector<double> hand(c.size(), 0.0);
  for (std::size_t i = 0; i + 2400 < c.size(); ++i) hand[i] = c.samples[i];
  CHECK(back.samples == hand);
  const auto other = time_shift(time_shift(c, -0.1), 0.1);
  std::vector<double> hand2(c.size(), 0.0);
  for (std::size_t i = 2400; i < c.size(); ++i) hand2[i] = c.samples[i];
  CHECK(other.samples == hand2);
  CHECK_THROWS_AS(time_shift(c, 1.5), ValidationError);
  CHECK_THROWS_AS(time_shift(c, -1.01), ValidationError);
}

TEST_CASE("pitch_shift") {
  SUBCASE("zero cents") {
    const auto c = tone(440, 1.0);
    const auto out = pitch_shift(c, 0.0);
    REQUIRE(out.size() == c.size());
    CHECK(testing::naive_pearson(out.samples, c.samples) >= 0.999);
  }
  SUBCASE("ratio definition") { CHECK_NEAR(std::exp2(10.0 / 1200.0), 1.0057929, 5e-8); }
  SUBCASE("440 Hz up ten cents") {
    const auto c = tone(440, 2.0);
    const auto out = pitch_shift(c, 10.0);
    CHECK(std::abs(static_cast<double>(out.size()) - static_cast<double>(c.size())) <= 0.001 * c.size());
    CHECK_NEAR(testing::dominant_frequency(out.samples, 24000), 442.55, 1.0);
  }
  SUBCASE("downward shift and guard") {
    const auto out = pitch_shift(tone(1000, 2.0), -50.0);
    CHECK_NEAR(testing::dominant_frequency(out.samples, 24000), 1000.0 * std::exp2(-50.0 / 1200.0), 1.0);
    CHECK_THROWS_AS(pitch_shift(tone(100, 0.1), 101.0), ValidationError);
  }
}

TEST_CASE("gain") {
  const auto c = tone(200, 0.5);
  CHECK(gain(c, 0.0).samples == c.samples);
  const auto up = gain(c, 2.0);
  for (std::size_t i = 0; i < c.size(); i += 97) CHECK_NEAR(up.samples[i], c.samples[i] * 1.258925, 1e-6 * std::abs(c.samples[i] * 1.258925));
  CHECK_NEAR(rms(gain(c, -2.0).samples) / rms(c.samples), 0.794328, 1e-6);
  // No clipping inside the op.
  const auto hot = gain(tone(200, 0.1, 24000, 0.99), 6.0);
  CHECK(*std::max_element(hot.samples.begin(), hot.samples.end()) > 1.0);
  CHECK_THROWS_AS(gain(c, 25.0), ValidationError);
}

TEST_CASE("butterworth filters") {
  SUBCASE("highpass passes 1 kHz") {
    const auto c = tone(1000, 1.0);
    const double g = steady_gain_db(c, butterworth_filter(c, FilterMode::kHighpass, 100.0), 0.2);
    CHECK(g >= -0.2);
    CHECK(g <= 0.2);
  }
  SUBCASE("highpass rejects 25 Hz") {
    const auto c = tone(25, 3.0);
    CHECK(steady_gain_db(c, butterworth_filter(c, FilterMode::kHighpass, 100.0), 1.0) <= -20.0);
  }
  SUBCASE("lowpass keeps DC") {
    AudioClip c{std::vector<double>(24000, 0.3), 24000};
    const auto out = butterworth_filter(c, FilterMode::kLowpass, 16000.0 * 0.7);  // below 12 kHz Nyquist
    CHECK_NEAR(out.samples.back(), 0.3, 1e-3);
    AudioClip wide{std::vector<double>(48000, 0.3), 48000};
    CHECK_NEAR(butterworth_filter(wide, FilterMode::kLowpass, 16000.0).samples.back(), 0.3, 1e-3);
  }
  SUBCASE("minus 3 dB at the cutoff") {
    for (double fc : {80.0, 100.0, 120.0}) {
      CHECK_NEAR(design_butterworth(FilterMode::kHighpass, fc, 24000).magnitude_db(fc, 24000), -3.0103, 0.3);
    }
    for (double fc : {15000.0, 16500.0, 18000.0}) {
      CHECK_NEAR(design_butterworth(FilterMode::kLowpass, fc, 48000).magnitude_db(fc, 48000), -3.0103, 0.3);
    }
  }
  SUBCASE("measured response tracks the analytic magnitude at fc/4, fc and 4fc") {
    struct Case {
      FilterMode mode;
      double fc;
      int sr;
    };
    for (const auto& k : {Case{FilterMode::kHighpass, 100.0, 24000}, Case{FilterMode::kHighpass, 80.0, 24000},
                          Case{FilterMode::kLowpass, 2000.0, 24000}, Case{FilterMode::kLowpass, 15000.0, 48000}}) {
      for (double f : {k.fc / 4, k.fc, 4 * k.fc}) {
        if (f >= k.sr / 2.0) f = 0.45 * k.sr;  // clipped to Nyquist
        const auto c = tone(f, 3.0, k.sr);
        const double measured = steady_gain_db(c, butterworth_filter(c, k.mode, k.fc), 1.0);
        CHECK(std::abs(measured - butterworth_oracle_db(k.mode, f, k.fc, k.sr)) <= 0.5);
      }
    }
  }
  SUBCASE("cutoff at Nyquist") {
    CHECK_THROWS_AS(butterworth_filter(tone(100, 0.1), FilterMode::kLowpass, 12000.0), ValidationError);
    CHECK_THROWS_AS(butterworth_filter(tone(100, 0.1), FilterMode::kLowpass, 0.0), ValidationError);
  }
}

TEST_CASE("parametric eq") {
  const auto c = tone(1000, 2.0);
  SUBCASE("flat gains are the identity") {
    const std::vector<double> zero(7, 0.0);
    const auto out = parametric_eq(c, zero);
    for (std::size_t i = 0; i < c.size(); ++i) REQUIRE(std::abs(out.samples[i] - c.samples[i]) <= 1e-6);
  }
  SUBCASE("a band boosts its center") {
    std::vector<double> g(7, 0.0);
    g[3] = 3.0;
    CHECK(std::abs(steady_gain_db(c, parametric_eq(c, g), 0.5) - 3.0) <= 0.5);
    for (std::size_t b = 0; b < 7; ++b) {
      std::vector<double> one(7, 0.0);
      one[b] = -3.0;
      const auto probe = tone(kEqCentersHz[b], 4.0, 48000);
      CHECK(std::abs(steady_gain_db(probe, parametric_eq(probe, one), 2.0) + 3.0) <= 0.5);
      CHECK_NEAR(design_peaking(kEqCentersHz[b], kEqQ, -3.0, 48000).magnitude_db(kEqCentersHz[b], 48000), -3.0, 1e-9);
    }
  }
  SUBCASE("g followed by -g restores the level") {
    const auto x = music_like(24000, 2.0);
    const std::vector<double> g = {2.5, -1.0, 3.0, -3.0, 1.5, 0.5, -2.0};
    std::vector<double> neg(7);
    for (std::size_t i = 0; i < 7; ++i) neg[i] = -g[i];
    const auto out = parametric_eq(parametric_eq(x, g), neg);
    CHECK(std::abs(steady_gain_db(x, out, 0.5)) <= 0.1);
  }
  SUBCASE("band above Nyquist is bypassed") {
    CHECK_FALSE(eq_band_realisable(6, 24000));
    CHECK(eq_band_realisable(6, 48000));
    std::vector<double> g(7, 0.0);
    g[6] = 3.0;
    CHECK(parametric_eq(c, g).samples == c.samples);
  }
  SUBCASE("guard") {
    std::vector<double> g(7, 0.0);
    g[0] = 13.0;
    CHECK_THROWS_AS(parametric_eq(c, g), ValidationError);
    CHECK_THROWS_AS(parametric_eq(c, std::vector<double>(6, 0.0)), ValidationError);
  }
}

TEST_CASE("gaussian noise at a target SNR") {
  SUBCASE("noise level") {
    // Unit-RMS tone: amplitude sqrt 2.
    const auto c = tone(440, 1.0, 24000, std::sqrt(2.0));
    REQUIRE(std::abs(rms(c.samples) - 1.0) <= 1e-6);
    const auto out = add_noise_snr(c, 40.0, 5);
    std::vector<double> n(c.size());
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = out.samples[i] - c.samples[i];
    CHECK_NEAR(rms(n), 0.01, 1e-12);
  }
  SUBCASE("infinite SNR and silence") {
    const auto c = tone(440, 0.5);
    CHECK(add_noise_snr(c, INFINITY, 1).samples == c.samples);
    AudioClip silent{std::vector<double>(100, 0.0), 24000};
    CHECK(add_noise_snr(silent, 30.0, 1).samples == silent.samples);
  }
  SUBCASE("measured SNR on 10 s") {
    const auto c = music_like(24000, 10.0);
    const auto out = add_noise_snr(c, 30.0, 17);
    double ps = 0, pn = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      ps += c.samples[i] * c.samples[i];
      pn += (out.samples[i] - c.samples[i]) * (out.samples[i] - c.samples[i]);
    }
    const double snr = 10.0 * std::log10(ps / pn);
    CHECK(snr >= 29.5);
    CHECK(snr <= 30.5);
  }
  SUBCASE("same seed, same noise") {
    const auto c = tone(440, 0.5);
    CHECK(add_noise_snr(c, 35.0, 3).samples == add_noise_snr(c, 35.0, 3).samples);
    CHECK_FALSE(add_noise_snr(c, 35.0, 3).samples == add_noise_snr(c, 35.0, 4).samples);
  }
}

TEST_CASE("pipeline") {
  const auto clip = music_like(48000, 3.0);

  SUBCASE("all probabilities zero is bit-identical") {
    const auto cfg = all_probabilities(0.0);
    for (std::uint64_t s = 0; s < 5; ++s) CHECK(apply_pipeline(clip, cfg, s).samples == clip.samples);
  }

  SUBCASE("deterministic") {
    const AugmentConfig cfg;
    CHECK(apply_pipeline(clip, cfg, 3).samples == apply_pipeline(clip, cfg, 3).samples);
  }

  SUBCASE("all probabilities one equals hand composition of the eight ops") {
    const auto cfg = all_probabilities(1.0);
    const auto result = augment_clip(clip, cfg, 12345);
    REQUIRE(result.draws.size() == kNumAugmentOps);
    AudioClip hand = clip;
    for (std::size_t i = 0; i < kNumAugmentOps; ++i) {
      const auto d = draw_op(cfg, 12345, op_at(i));
      CHECK(result.draws[i].applied);
      CHECK(result.draws[i].params == d.params);
      hand = apply_op(hand, d);
    }
    hard_clip(hand);
    CHECK(result.clip.samples == hand.samples);
  }

  SUBCASE("ops fail soft when a draw cannot apply") {
    const auto result = augment_clip(music_like(24000, 1.0), all_probabilities(1.0), 1);
    const auto& lpf = result.draws[static_cast<std::size_t>(AugmentOp::kLowpass)];
    CHECK(lpf.fired);
    CHECK_FALSE(lpf.applied);
    CHECK(lpf.note == "cutoff at or above Nyquist");
  }

  SUBCASE("output is hard clipped") {
    auto cfg = all_probabilities(0.0);
    cfg.setting(AugmentOp::kGain) = {{2.0, 2.0}, 1.0};
    AudioClip loud{testing::sine(100, 0.5, 24000, 0.95), 24000};
    const auto out = apply_pipeline(loud, cfg, 0);
    for (double v : out.samples) REQUIRE(std::abs(v) <= 1.0);
    CHECK(*std::max_element(out.samples.begin(), out.samples.end()) == 1.0);
  }

  SUBCASE("each draw depends only on its own op index") {
    auto a = all_probabilities(0.5);
    auto b = a;
    b.setting(AugmentOp::kGain).range = {-9.0, 9.0};
    for (std::size_t i = 0; i < kNumAugmentOps; ++i) {
      if (op_at(i) == AugmentOp::kGain) continue;
      CHECK(draw_op(a, 7, op_at(i)).params == draw_op(b, 7, op_at(i)).params);
      CHECK(draw_op(a, 7, op_at(i)).fired == draw_op(b, 7, op_at(i)).fired);
    }
  }

  SUBCASE("copies get distinct seeds") {
    CHECK(clip_seed("x", 0) != clip_seed("x", 1));
    CHECK(clip_seed("x", 0) != clip_seed("y", 0));
  }
}

TEST_CASE("drawn parameters are uniform over their ranges") {
  const AugmentConfig cfg;
  constexpr std::size_t n = 100000;
  for (std::size_t op = 0; op < kNumAugmentOps; ++op) {
    const auto& s = cfg.ops[op];
    double sum = 0.0;
    std::size_t fired = 0, count = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto d = draw_op(cfg, derive_seed({k}), op_at(op));
      for (double v : d.params) {
        REQUIRE(v >= s.range.low);
        REQUIRE(v <= s.range.high);
        sum += v;
        ++count;
      }
      fired += d.fired;
    }
    const double width = s.range.high - s.range.low;
    const double se = width / std::sqrt(12.0 * static_cast<double>(count));
    INFO(std::string(op_name(op_at(op))));
    CHECK(std::abs(sum / count - 0.5 * (s.range.low + s.range.high)) <= 3.0 * se);
    const double p = s.probability;
    CHECK(std::abs(static_cast<double>(fired) / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("config validation and json") {
  AugmentConfig cfg;
  cfg.setting(AugmentOp::kGain).probability = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = AugmentConfig{};
  cfg.setting(AugmentOp::kHighpass).range = {120, 80};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = AugmentConfig{};
  cfg.copies_per_clip = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  AugmentConfig d;
  d.seed = 42;
  d.copies_per_clip = 3;
  d.disable(AugmentOp::kPitchShift);
  const auto back = augment_config_from_json(to_json(d));
  CHECK(back.seed == 42);
  CHECK(back.copies_per_clip == 3);
  CHECK(back.setting(AugmentOp::kPitchShift).probability == 0.0);
  CHECK(back.setting(AugmentOp::kGain).probability == 0.9);
  CHECK(op_from_name("gaussian_noise") == AugmentOp::kGaussianNoise);
  CHECK_THROWS_AS(op_from_name("reverb"), ValidationError);
  CHECK(augment_config_from_json({{"disable", {"gain"}}}).setting(AugmentOp::kGain).probability == 0.0);
}
