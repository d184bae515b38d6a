// tests/test_embeddings.cc

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
#include <filesystem>
#include <random>

#include "hear/core/audio_io.hpp"
#include "hear/core/embedding_io.hpp"
#include "hear/core/error.hpp"
#include "hear/core/manifest.hpp"
#include "hear/embeddings/resolve.hpp"
#include "hear/embeddings/toy_features.hpp"
#include "near.hpp"
#include "spectrum.hpp"

using namespace hear;
using namespace hear::embeddings;
namespace fs = std::filesystem;

namespace {

// Center frequency of each triangle: edges evenly spaced in HTK mel.
std::vector<double> oracle_mel_centers(std::size_t n_mels, double max_hz) {
  const double top = 2595.0 * std::log10(1.0 + max_hz / 700.0);
  std::vector<double> c;
  for (std::size_t i = 1; i <= n_mels; ++i) {
    const double mel = top * static_cast<double>(i) / static_cast<double>(n_mels + 1);
    c.push_back(700.0 * (std::pow(10.0, mel / 2595.0) - 1.0));
  }
  return c;
}

fs::path scratch_dir() {
  auto d = fs::temp_directory_path() / "hear_test_embeddings";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("toy log-mel") {
  SUBCASE("silence is all zeros") {
    const AudioClip silent{std::vector<double>(24000, 0.0), 24000};
    const auto seq = toy_logmel(silent);
    CHECK(seq.dim == 64);
    for (double v : seq.frames) REQUIRE(v == 0.0);
    CHECK(seq.scale == Scale::kSegment);
    CHECK(seq.source_id == "toy-logmel");
  }
  SUBCASE("ten seconds at a 20 ms hop") {
    const AudioClip c{testing::sine(300, 10.0, 24000, 0.3), 24000};
    const auto seq = toy_logmel(c, 64, 0.02);
    CHECK(std::abs(static_cast<long>(seq.num_frames) - 500) <= 1);
    CHECK(seq.frame_rate_hz == 50.0);
  }
  SUBCASE("a 1 kHz tone peaks in the bin centered nearest 1 kHz") {
    const auto centers = oracle_mel_centers(64, 12000.0);
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (std::abs(centers[i] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = i;
    }
    const AudioClip c{testing::sine(1000, 1.0, 24000, 0.5), 24000};
    const auto seq = toy_logmel(c);
    for (std::size_t t = 0; t < seq.num_frames; ++t) {
      const auto* row = &seq.frames[t * seq.dim];
      const auto argmax = static_cast<std::size_t>(std::max_element(row, row + seq.dim) - row);
      REQUIRE(argmax == nearest);
    }
  }
  SUBCASE("filterbank layout") {
    const auto bank = mel_filterbank(64, 24000);
    REQUIRE(bank.size() == 64);
    CHECK(bank[0].size() == kStftWindow / 2 + 1);
    CHECK_NEAR(hz_to_mel(1000.0), 2595.0 * std::log10(1.0 + 1000.0 / 700.0), 1e-9);
    CHECK_NEAR(mel_to_hz(hz_to_mel(4321.0)), 4321.0, 1e-9);
  }
  SUBCASE("deterministic from the same bytes") {
    const auto bytes = encode_wav(testing::sine(440, 1.0, 44100, 0.4), 44100, 1, WavEncoding::kPcm16);
    CHECK(toy_logmel(decode_wav(bytes)).frames == toy_logmel(decode_wav(bytes)).frames);
  }
  SUBCASE("too short") {
    const AudioClip c{std::vector<double>(100, 0.1), 24000};
    CHECK_THROWS_WITH_AS(toy_logmel(c), doctest::Contains("shorter than one hop"), ValidationError);
  }
}

TEST_CASE("toy track statistics") {
  SUBCASE("constant frames have zero spread") {
    EmbeddingSequence s{"toy-logmel", Scale::kSegment, 100, 3, std::vector<double>(300, 2.5), 50.0};
    const auto out = toy_track_stats(s, 0.5);
    CHECK(out.dim == 6);
    CHECK(out.scale == Scale::kTrack);
    for (std::size_t k = 0; k < out.num_frames; ++k) {
      for (std::size_t d = 0; d < 3; ++d) {
        CHECK(out.at(k, d) == 2.5);
        CHECK(out.at(k, 3 + d) == 0.0);
      }
    }
  }
  SUBCASE("window count and oracle") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(1.0, 2.0);
    EmbeddingSequence s{"toy-logmel", Scale::kSegment, 23, 4, {}, 10.0};
    for (std::size_t i = 0; i < 23 * 4; ++i) s.frames.push_back(n(rng));
    const auto out = toy_track_stats(s, 0.5);  // w = 5 frames
    REQUIRE(out.num_frames == 5);               // ceil(23 / 5)
    CHECK(out.num_frames <= s.num_frames);
    for (std::size_t k = 0; k < out.num_frames; ++k) {
      const std::size_t b = k * 5, e = std::min<std::size_t>(23, b + 5);
      for (std::size_t d = 0; d < 4; ++d) {
        // Single-pass oracle: E[x^2] - E[x]^2.
        double sum = 0, sq = 0;
        for (std::size_t t = b; t < e; ++t) {
          sum += s.at(t, d);
          sq += s.at(t, d) * s.at(t, d);
        }
        const double cnt = static_cast<double>(e - b);
        const double mean = sum / cnt;
        CHECK_NEAR(out.at(k, d), mean, 1e-9);
        CHECK_NEAR(out.at(k, 4 + d), std::sqrt(std::max(0.0, sq / cnt - mean * mean)), 1e-9);
      }
    }
  }
}

TEST_CASE("resolving features for a manifest entry") {
  const auto dir = scratch_dir();
  write_wav({testing::sine(500, 2.0, 24000, 0.3), 24000}, dir / "a.wav");
  EmbeddingSequence file_seq{"toy-logmel", Scale::kSegment, 4, 64, std::vector<double>(256, 0.25), 50.0};
  write_embedding(file_seq, dir / "a.toy.hemb");
  EmbeddingSequence muq{"muq", Scale::kTrack, 2, 8, std::vector<double>(16, 1.0), 25.0};
  write_embedding(muq, dir / "a.muq.hemb");

  Manifest m;
  m.base_dir = dir;
  const FeatureConfig cfg{64, 0.02, 0.5};
  const std::vector<SourceRequest> toy = {{"toy-logmel", Scale::kSegment}, {"toy-track", Scale::kTrack}};

  SUBCASE("embedding files win over audio") {
    ManifestEntry e{"a", "a.wav", {{"toy-logmel", "a.toy.hemb"}}, std::nullopt, Split::kTrain};
    const auto r = resolve_features(e, m, toy, cfg);
    CHECK(r.by_source.at("toy-logmel") == file_seq);
    CHECK(r.provenance.at("toy-logmel").rfind("hemb:", 0) == 0);
    CHECK(r.provenance.at("toy-track") == "toy:a.wav");
  }
  SUBCASE("audio only computes both toy scales") {
    ManifestEntry e{"a", "a.wav", {}, std::nullopt, Split::kTrain};
    const auto r = resolve_features(e, m, toy, cfg);
    const auto seg = r.by_source.at("toy-logmel");
    const auto trk = r.by_source.at("toy-track");
    CHECK(seg.num_frames == 100);
    CHECK(trk.dim == 128);
    CHECK(trk.num_frames == 4);
    CHECK(trk == toy_track_stats(seg, 0.5));
  }
  SUBCASE("real encoder source") {
    ManifestEntry with{"a", std::nullopt, {{"muq", "a.muq.hemb"}}, std::nullopt, Split::kTrain};
    CHECK(resolve_features(with, m, {{"muq", Scale::kTrack}}, cfg).by_source.at("muq") == muq);
    ManifestEntry without{"a", "a.wav", {}, std::nullopt, Split::kTrain};
    CHECK_THROWS_WITH_AS(resolve_features(without, m, {{"muq", Scale::kTrack}}, cfg),
                         doctest::Contains("'muq'"), ValidationError);
  }
  SUBCASE("scale mismatch") {
    ManifestEntry e{"a", std::nullopt, {{"muq", "a.muq.hemb"}}, std::nullopt, Split::kTrain};
    CHECK_THROWS_WITH_AS(resolve_features(e, m, {{"muq", Scale::kSegment}}, cfg),
                         doctest::Contains("scale"), ValidationError);
  }
  SUBCASE("clips held in memory replace the audio path") {
    ManifestEntry e{"a", "a.wav", {{"toy-logmel", "a.toy.hemb"}}, std::nullopt, Split::kTrain};
    const AudioClip mem{testing::sine(800, 1.0, 24000, 0.2), 24000};
    const auto r = resolve_features(e, m, toy, cfg, &mem);
    CHECK(r.by_source.at("toy-logmel").num_frames == 50);
  }
}
