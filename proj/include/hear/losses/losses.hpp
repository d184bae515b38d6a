// include/hear/losses/losses.hpp

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

#include <json.hpp>

#include "hear/grad/graph.hpp"

namespace hear::losses {

using grad::Graph;
using grad::Var;

enum class TieRule { kByIndex };

struct LossConfig {
  double beta = 0.15;  // ranking weight
  double delta = 1.0;  // SmoothL1 transition point
  TieRule tie_rule = TieRule::kByIndex;

  // Per-track default beta: 0.15 for track 1, 0.05 for track 2.
  static LossConfig for_track(int track);
  void validate() const;
};

nlohmann::json to_json(const LossConfig& c);
// Missing keys fall back to the track's defaults.
LossConfig loss_config_from_json(const nlohmann::json& j, int track);

struct LossReport {
  double total = 0.0;
  double smooth_l1_component = 0.0;
  double listmle_component = 0.0;
};

// Plain evaluations, used where no gradient is needed.
double smooth_l1_value(std::span<const double> pred, std::span<const double> target, double delta);
// Items ordered by label descending, ties by ascending index.
std::vector<std::size_t> listmle_order(std::span<const double> labels);
double listmle_value(std::span<const double> scores, std::span<const double> labels);

/// Mean SmoothL1 over all elements of pred - target.
template <typename Real>
Var<Real> smooth_l1(Graph<Real>& g, Var<Real> pred, Var<Real> target, Real delta);

/// Length-normalized ListMLE of `scores` (any shape, n elements) against
/// `labels` (n values). Labels carry no gradient.
template <typename Real>
Var<Real> listmle(Graph<Real>& g, Var<Real> scores, std::span<const double> labels);

template <typename Real>
struct HybridLoss {
  Var<Real> total;
  LossReport report;
};

/// SmoothL1 over every (item, dimension) plus beta times the per-dimension
/// ListMLE across the batch averaged over dimensions. pred and target are
/// [B, K]; the ranking labels are the target values.
template <typename Real>
HybridLoss<Real> hybrid_loss(Graph<Real>& g, Var<Real> pred, Var<Real> target, const LossConfig& cfg);

}  // namespace hear::losses
