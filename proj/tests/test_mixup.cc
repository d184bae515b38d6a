// tests/test_mixup.cc

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
#include <random>

#include "hear/core/error.hpp"
#include "hear/mixup/mixup.hpp"
#include "near.hpp"

using namespace hear;
using namespace hear::mixup;

namespace {

std::vector<ScoreVector> scalars(std::initializer_list<double> v) {
  std::vector<ScoreVector> out;
  for (double x : v) out.push_back({{x}, {}});
  return out;
}

// Direct kernel evaluation, normalized over j != anchor.
std::vector<double> oracle_probabilities(const std::vector<ScoreVector>& labels, std::size_t anchor, double sigma) {
  std::vector<double> p(labels.size(), 0.0);
  double z = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j == anchor) continue;
    double d2 = 0.0;
    for (std::size_t k = 0; k < labels[j].size(); ++k)
      d2 += std::pow(labels[j].values[k] - labels[anchor].values[k], 2);
    p[j] = std::exp(-d2 / (2 * sigma * sigma));
    z += p[j];
  }
  for (auto& v : p) v /= z;
  return p;
}

}  // namespace

TEST_CASE("pair probabilities") {
  SUBCASE("labels 0, 1, 2 from anchor 0") {
    const auto labels = scalars({0, 1, 2});
    const auto p = pair_probabilities(labels, 0, 1.0);
    CHECK(p[0] == 0.0);
    CHECK_NEAR(p[1], 0.81757, 1e-5);
    CHECK_NEAR(p[2], 0.18243, 1e-5);
    const double e1 = std::exp(-0.5), e2 = std::exp(-2.0);
    CHECK_NEAR(p[1], e1 / (e1 + e2), 1e-15);
  }
  SUBCASE("identical labels are uniform") {
    const auto p = pair_probabilities(scalars({3, 3, 3, 3, 3}), 2, 1.0);
    for (std::size_t j = 0; j < 5; ++j) CHECK(p[j] == (j == 2 ? 0.0 : 0.25));
  }
  SUBCASE("a very wide kernel is uniform") {
    const auto p = pair_probabilities(scalars({0, 1, 5, -3}), 1, 1e6);
    for (std::size_t j : {0, 2, 3}) CHECK_NEAR(p[j], 1.0 / 3.0, 1e-6);
  }
  SUBCASE("properties on random five-dimensional labels") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(3.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<ScoreVector> labels(8);
      for (auto& l : labels)
        for (int k = 0; k < 5; ++k) l.values.push_back(n(rng));
      const std::size_t anchor = static_cast<std::size_t>(trial % 8);
      const auto p = pair_probabilities(labels, anchor, 1.0);
      const auto oracle = oracle_probabilities(labels, anchor, 1.0);
      double total = 0.0;
      for (std::size_t j = 0; j < 8; ++j) {
        total += p[j];
        CHECK_NEAR(p[j], oracle[j], 1e-12);
      }
      CHECK_NEAR(total, 1.0, 1e-12);
      auto shifted = labels;
      for (auto& l : shifted)
        for (int k = 0; k < 5; ++k) l.values[k] += 10.0 * (k + 1);
      const auto ps = pair_probabilities(shifted, anchor, 1.0);
      for (std::size_t j = 0; j < 8; ++j) CHECK_NEAR(ps[j], p[j], 1e-12);
    }
  }
  SUBCASE("far-apart labels do not underflow") {
    const auto p = pair_probabilities(scalars({0, 100, 200}), 0, 1.0);
    CHECK(p[1] == 1.0);
    CHECK(p[2] == 0.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(pair_probabilities(scalars({1}), 0, 1.0), ValidationError);
    CHECK_THROWS_AS(pair_probabilities(scalars({1, 2}), 0, 0.0), ValidationError);
  }
}

TEST_CASE("partner sampling") {
  const MixupConfig cfg;
  SUBCASE("two items always pick the other") {
    std::mt19937_64 rng(1);
    const auto labels = scalars({1, 9});
    for (int i = 0; i < 1000; ++i) {
      REQUIRE(sample_pair(labels, 0, cfg, rng) == 1);
      REQUIRE(sample_pair(labels, 1, cfg, rng) == 0);
    }
  }
  SUBCASE("frequencies follow the kernel") {
    std::mt19937_64 rng(77);
    const auto labels = scalars({0, 1, 2});
    constexpr int n = 100000;
    int ones = 0;
    for (int i = 0; i < n; ++i) ones += sample_pair(labels, 0, cfg, rng) == 1;
    const double p = 0.81757;
    CHECK(std::abs(static_cast<double>(ones) / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
  }
  SUBCASE("same seed, same draws") {
    const auto labels = scalars({0, 1, 2, 3, 4});
    std::mt19937_64 a(5), b(5);
    for (int i = 0; i < 200; ++i) REQUIRE(sample_pair(labels, 2, cfg, a) == sample_pair(labels, 2, cfg, b));
  }
}

TEST_CASE("lambda draws") {
  std::mt19937_64 rng(123);
  constexpr std::size_t n = 100000;
  std::vector<double> l(n);
  for (auto& v : l) {
    v = sample_lambda(2.0, rng);
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
  double mean = 0.0;
  for (double v : l) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : l) var += (v - mean) * (v - mean);
  var /= n - 1;
  CHECK_NEAR(mean, 0.5, 0.005);
  const double beta_var = 2.0 * 2.0 / (4.0 * 4.0 * 5.0);  // a^2 / ((2a)^2 (2a + 1))
  CHECK(beta_var == 0.05);
  CHECK_NEAR(var, beta_var, 0.1 * beta_var);

  // Two-sample KS distance between the draws and their reflections.
  std::vector<double> a = l, b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = 1.0 - l[i];
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double ks = 0.0;
  while (i < n && j < n) {
    const double x = std::min(a[i], b[j]);
    while (i < n && a[i] <= x) ++i;
    while (j < n && b[j] <= x) ++j;
    ks = std::max(ks, std::abs(static_cast<double>(i) - static_cast<double>(j)) / n);
  }
  CHECK(ks < 0.01);
  CHECK_THROWS_AS(sample_lambda(0.0, rng), ValidationError);
}

TEST_CASE("convex mixing") {
  const std::vector<double> xi = {1, 0}, xj = {0, 1};
  SUBCASE("endpoint") {
    const std::vector<double> yi = {3.3}, yj = {4.4};
    const auto m = mix(xi, xj, yi, yj, 1.0);
    CHECK(m.x == xi);
    CHECK(m.y == yi);
  }
  SUBCASE("quarter") {
    const std::vector<double> y = {0};
    CHECK(mix(xi, xj, y, y, 0.25).x == std::vector<double>{0.25, 0.75});
  }
  SUBCASE("labels") {
    const std::vector<double> yi = {3}, yj = {5}, x = {0};
    CHECK(mix(x, x, yi, yj, 0.5).y == std::vector<double>{4});
  }
  SUBCASE("swapping the pair and lambda is exact, and results stay in the hull") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 10.0);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<double> a(6), b(6), ya(5), yb(5);
      for (auto* v : {&a, &b, &ya, &yb})
        for (auto& e : *v) e = n(rng);
      if (trial % 10 == 0) b = a;
      const double lambda = sample_lambda(2.0, rng);
      const auto m1 = mix(a, b, ya, yb, lambda);
      const auto m2 = mix(b, a, yb, ya, 1.0 - lambda);
      REQUIRE(m1.x == m2.x);
      REQUIRE(m1.y == m2.y);
      for (std::size_t k = 0; k < 5; ++k) {
        REQUIRE(m1.y[k] >= std::min(ya[k], yb[k]));
        REQUIRE(m1.y[k] <= std::max(ya[k], yb[k]));
      }
    }
  }
  SUBCASE("shape mismatch") {
    const std::vector<double> three = {1, 2, 3}, y = {0};
    CHECK_THROWS_AS(mix(xi, three, y, y, 0.5), ValidationError);
  }
}

TEST_CASE("batch plans") {
  const auto labels = scalars({1, 2, 3, 4, 5, 6, 7, 8});
  SUBCASE("disabled or certain") {
    MixupConfig off;
    off.enabled = false;
    std::mt19937_64 rng(1);
    for (const auto& a : plan_batch(labels, off, rng)) CHECK_FALSE(a.applied);
    MixupConfig always;
    always.apply_probability = 1.0;
    const auto plan = plan_batch(labels, always, rng);
    for (std::size_t i = 0; i < plan.size(); ++i) {
      CHECK(plan[i].applied);
      CHECK(plan[i].partner != i);
    }
    MixupConfig never;
    never.apply_probability = 0.0;
    for (const auto& a : plan_batch(labels, never, rng)) CHECK_FALSE(a.applied);
  }
  SUBCASE("one item is never mixed") {
    MixupConfig always;
    always.apply_probability = 1.0;
    std::mt19937_64 rng(1);
    CHECK_FALSE(plan_batch(scalars({2}), always, rng)[0].applied);
  }
  SUBCASE("apply rate") {
    std::mt19937_64 rng(4);
    const MixupConfig cfg;
    int applied = 0, total = 0;
    for (int b = 0; b < 5000; ++b)
      for (const auto& a : plan_batch(labels, cfg, rng)) {
        applied += a.applied;
        ++total;
      }
    CHECK(std::abs(static_cast<double>(applied) / total - 0.5) <= 3.0 * std::sqrt(0.25 / total));
  }
  SUBCASE("mixing matrix reproduces mix") {
    MixupConfig always;
    always.apply_probability = 1.0;
    std::mt19937_64 rng(3);
    const auto plan = plan_batch(labels, always, rng);
    const auto m = mixing_matrix(plan);
    for (std::size_t i = 0; i < 8; ++i) {
      double row = 0.0, y = 0.0;
      for (std::size_t j = 0; j < 8; ++j) {
        row += m[i * 8 + j];
        y += m[i * 8 + j] * labels[j].values[0];
      }
      CHECK(row == 1.0);
      const std::vector<double> yi = labels[i].values, yj = labels[plan[i].partner].values, x = {0};
      CHECK_NEAR(y, mix(x, x, yi, yj, plan[i].lambda).y[0], 1e-15);
    }
  }
}

TEST_CASE("config") {
  MixupConfig c;
  c.sigma = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.apply_probability = 1.1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  const auto back = mixup_config_from_json({{"sigma", 0.5}, {"enabled", false}});
  CHECK(back.sigma == 0.5);
  CHECK(back.alpha == 2.0);
  CHECK_FALSE(back.enabled);
  CHECK(to_json(MixupConfig{}) == nlohmann::json{{"sigma", 1.0}, {"alpha", 2.0}, {"apply_probability", 0.5}, {"enabled", true}});
}
