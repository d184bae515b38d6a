// tests/support/oracles.hpp

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

// Independent reference implementations used only by tests. They favour
// directness over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace hear::testing {

inline double naive_mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Covariance formula evaluated directly: cov / (sd_x sd_y).
inline double naive_pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = naive_mean(x), my = naive_mean(y);
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  const double n = static_cast<double>(x.size());
  return (cov / n) / (std::sqrt(vx / n) * std::sqrt(vy / n));
}

// rank_i = 1 + #{x_j < x_i} + (#{x_j == x_i} - 1) / 2
inline std::vector<double> naive_average_ranks(std::span<const double> x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = 1.0 + static_cast<double>(less) + (static_cast<double>(equal) - 1.0) / 2.0;
  }
  return r;
}

inline double naive_spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = naive_average_ranks(x);
  const auto ry = naive_average_ranks(y);
  return naive_pearson(rx, ry);
}

// Tau-b by enumerating every pair once.
inline double brute_force_kendall(std::span<const double> pred, std::span<const double> truth) {
  std::int64_t c = 0, d = 0, tied_pred_only = 0, tied_truth_only = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = i + 1; j < pred.size(); ++j) {
      const double dp = pred[i] - pred[j], dt = truth[i] - truth[j];
      if (dp == 0.0 && dt == 0.0) continue;
      if (dp == 0.0) {
        ++tied_pred_only;
      } else if (dt == 0.0) {
        ++tied_truth_only;
      } else if ((dp > 0) == (dt > 0)) {
        ++c;
      } else {
        ++d;
      }
    }
  }
  return static_cast<double>(c - d) /
         std::sqrt(static_cast<double>(c + d + tied_pred_only) * static_cast<double>(c + d + tied_truth_only));
}

// Probability of choosing items in `perm` order by sequential softmax
// selection without replacement.
inline double plackett_luce_probability(std::span<const double> scores, const std::vector<std::size_t>& perm) {
  double p = 1.0;
  for (std::size_t t = 0; t < perm.size(); ++t) {
    double denom = 0.0;
    for (std::size_t u = t; u < perm.size(); ++u) denom += std::exp(scores[perm[u]]);
    p *= std::exp(scores[perm[t]]) / denom;
  }
  return p;
}

// Every permutation of 0..n-1 in lexicographic order.
inline std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Label-descending order, equal labels kept in index order.
inline std::vector<std::size_t> label_ordering(std::span<const double> labels) {
  std::vector<std::size_t> p(labels.size());
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = 1; i < p.size(); ++i) {
    for (std::size_t j = i; j > 0 && labels[p[j]] > labels[p[j - 1]]; --j) std::swap(p[j], p[j - 1]);
  }
  return p;
}

inline double sine_rms(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace hear::testing
