// include/hear/metrics/metrics.hpp

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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hear/core/error.hpp"
#include "hear/core/types.hpp"

namespace hear::metrics {

// A correlation whose preconditions fail (n < 2, zero variance, all ties).
class UndefinedMetricError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

double lcc(std::span<const double> pred, std::span<const double> truth);
double srcc(std::span<const double> pred, std::span<const double> truth);
// Kendall tau-b, O(n log n).
double ktau(std::span<const double> pred, std::span<const double> truth);
/// F1 of thresholded predictions against thresholded truth (both >= tau).
/// Returns 1 when neither side has a positive.
double tta(std::span<const double> pred, std::span<const double> truth, double tau);

// 1-based ranks; ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);
// Linear interpolation between order statistics, q in [0, 1].
double quantile(std::span<const double> x, double q);

/// Either a fixed TTA threshold or a quantile of each dimension's ground
/// truth (0.8 marks the top 20% as positive).
struct ThresholdSpec {
  std::optional<double> value;
  std::optional<double> quantile;

  void validate() const;
};

struct Metric {
  std::optional<double> value;
  std::string error;  // set when value is empty
};

struct DimensionReport {
  std::string name;
  Metric lcc, srcc, ktau;
  double tta = 0.0;
  double tta_threshold = 0.0;
};

struct MetricsReport {
  Metric lcc, srcc, ktau;
  double tta = 0.0;
  std::vector<DimensionReport> per_dimension;
  std::size_t n = 0;
  ThresholdSpec threshold;
};

/// Per-dimension metrics plus their unweighted means. An aggregate is
/// undefined when any of its dimensions is.
MetricsReport evaluate_scores(std::span<const ScoreVector> pred, std::span<const ScoreVector> truth,
                              const ThresholdSpec& threshold);

// Keys: lcc, srcc, ktau, tta, per_dimension, n, tta_threshold. Undefined
// correlations are null with the reason under "errors".
nlohmann::json to_json(const MetricsReport& r);

}  // namespace hear::metrics
