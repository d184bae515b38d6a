// src/mixup/mixup.cc

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

#include "hear/mixup/mixup.hpp"

#include <algorithm>
#include <cmath>

#include "hear/core/error.hpp"

namespace hear::mixup {

void MixupConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("mixup sigma must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("mixup alpha must be positive");
  if (!(apply_probability >= 0.0 && apply_probability <= 1.0)) {
    throw ValidationError("mixup apply_probability must lie in [0, 1]");
  }
}

nlohmann::json to_json(const MixupConfig& c) {
  return {{"sigma", c.sigma}, {"alpha", c.alpha}, {"apply_probability", c.apply_probability},
          {"enabled", c.enabled}};
}

MixupConfig mixup_config_from_json(const nlohmann::json& j) {
  MixupConfig c;
  c.sigma = j.value("sigma", c.sigma);
  c.alpha = j.value("alpha", c.alpha);
  c.apply_probability = j.value("apply_probability", c.apply_probability);
  c.enabled = j.value("enabled", c.enabled);
  c.validate();
  return c;
}

std::vector<double> pair_probabilities(std::span<const ScoreVector> labels, std::size_t anchor, double sigma) {
  const std::size_t n = labels.size();
  if (n < 2) throw ValidationError("pair_probabilities: need at least 2 items, got " + std::to_string(n));
  if (anchor >= n) throw ValidationError("pair_probabilities: anchor out of range");
  if (!(sigma > 0.0)) throw ValidationError("pair_probabilities: sigma must be positive");
  const auto& a = labels[anchor].values;
  std::vector<double> logit(n, 0.0);
  double best = -INFINITY;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == anchor) continue;
    const auto& b = labels[j].values;
    if (b.size() != a.size()) throw ValidationError("pair_probabilities: label dimensions differ");
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
    logit[j] = -d2 / (2.0 * sigma * sigma);
    best = std::max(best, logit[j]);
  }
  // Max-subtraction keeps far-apart labels from underflowing to 0/0.
  std::vector<double> p(n, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == anchor) continue;
    p[j] = std::exp(logit[j] - best);
    total += p[j];
  }
  for (auto& v : p) v /= total;
  return p;
}

std::size_t sample_pair(std::span<const ScoreVector> labels, std::size_t anchor, const MixupConfig& cfg,
                        std::mt19937_64& rng) {
  const auto p = pair_probabilities(labels, anchor, cfg.sigma);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cum = 0.0;
  std::size_t last = anchor;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j == anchor || p[j] == 0.0) continue;
    cum += p[j];
    last = j;
    if (u < cum) return j;
  }
  return last;  // rounding left u beyond the final cumulative sum
}

double sample_lambda(double alpha, std::mt19937_64& rng) {
  if (!(alpha > 0.0)) throw ValidationError("sample_lambda: alpha must be positive");
  std::gamma_distribution<double> gamma(alpha, 1.0);
  for (;;) {
    const double x = gamma(rng);
    const double y = gamma(rng);
    const double lambda = x / (x + y);
    if (lambda > 0.0 && lambda < 1.0) return lambda;
  }
}

std::pair<double, double> convex_weights(double lambda) {
  // Taking the larger weight first makes 1 - w exact (Sterbenz), so the pair
  // for 1 - lambda is this pair swapped, bit for bit.
  if (lambda >= 0.5) return {lambda, 1.0 - lambda};
  const double partner = 1.0 - lambda;
  return {1.0 - partner, partner};
}

MixPair mix(std::span<const double> x_i, std::span<const double> x_j, std::span<const double> y_i,
            std::span<const double> y_j, double lambda) {
  if (x_i.size() != x_j.size()) throw ValidationError("mix: feature shapes differ");
  if (y_i.size() != y_j.size()) throw ValidationError("mix: label shapes differ");
  MixPair out;
  out.lambda = lambda;
  const auto [wa, wb] = convex_weights(lambda);
  auto combine = [wa, wb](std::span<const double> a, std::span<const double> b) {
    std::vector<double> r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      // Clamp away a last-ulp overshoot so results stay inside [a, b].
      r[k] = std::clamp(wa * a[k] + wb * b[k], std::min(a[k], b[k]), std::max(a[k], b[k]));
    }
    return r;
  };
  out.x = combine(x_i, x_j);
  out.y = combine(y_i, y_j);
  return out;
}

std::vector<Assignment> plan_batch(std::span<const ScoreVector> labels, const MixupConfig& cfg,
                                   std::mt19937_64& rng) {
  cfg.validate();
  std::vector<Assignment> plan(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) plan[i].partner = i;
  if (!cfg.enabled || labels.size() < 2) return plan;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (coin(rng) >= cfg.apply_probability) continue;
    plan[i].partner = sample_pair(labels, i, cfg, rng);
    plan[i].lambda = sample_lambda(cfg.alpha, rng);
    plan[i].applied = true;
  }
  return plan;
}

std::vector<double> mixing_matrix(std::span<const Assignment> plan) {
  const std::size_t n = plan.size();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!plan[i].applied) {
      m[i * n + i] = 1.0;
      continue;
    }
    const auto [self, other] = convex_weights(plan[i].lambda);
    m[i * n + i] += self;
    m[i * n + plan[i].partner] += other;
  }
  return m;
}

}  // namespace hear::mixup
