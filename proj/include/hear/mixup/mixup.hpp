// include/hear/mixup/mixup.hpp

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

#include <cstddef>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hear/core/types.hpp"

namespace hear::mixup {

struct MixupConfig {
  double sigma = 1.0;   // Gaussian kernel bandwidth in label space
  double alpha = 2.0;   // Beta(alpha, alpha) for lambda
  double apply_probability = 0.5;
  bool enabled = true;

  void validate() const;
};

nlohmann::json to_json(const MixupConfig& c);
MixupConfig mixup_config_from_json(const nlohmann::json& j);

/// Partner probabilities for `anchor` under a Gaussian kernel on the
/// Euclidean label distance. The result has one entry per item; the anchor's
/// own entry is 0 and the rest sum to 1.
std::vector<double> pair_probabilities(std::span<const ScoreVector> labels, std::size_t anchor, double sigma);

// Inverse-CDF draw from pair_probabilities.
std::size_t sample_pair(std::span<const ScoreVector> labels, std::size_t anchor, const MixupConfig& cfg,
                        std::mt19937_64& rng);

// Beta(alpha, alpha) as X / (X + Y) with X, Y ~ Gamma(alpha, 1); in (0, 1).
double sample_lambda(double alpha, std::mt19937_64& rng);

struct MixPair {
  std::size_t anchor = 0;
  std::size_t partner = 0;
  double lambda = 1.0;
  std::vector<double> x;
  std::vector<double> y;
};

// (lambda, 1 - lambda), rounded so that convex_weights(1 - lambda) is the swap.
std::pair<double, double> convex_weights(double lambda);

// lambda * (x_i, y_i) + (1 - lambda) * (x_j, y_j).
MixPair mix(std::span<const double> x_i, std::span<const double> x_j, std::span<const double> y_i,
            std::span<const double> y_j, double lambda);

struct Assignment {
  std::size_t partner = 0;
  double lambda = 1.0;
  bool applied = false;
};

/// Per-item mixing decisions for one batch. Each item is mixed with
/// probability apply_probability; single-item batches are never mixed.
std::vector<Assignment> plan_batch(std::span<const ScoreVector> labels, const MixupConfig& cfg,
                                   std::mt19937_64& rng);

// Row-major [B, B] matrix M with mixed = M * original, for features and labels.
std::vector<double> mixing_matrix(std::span<const Assignment> plan);

}  // namespace hear::mixup
