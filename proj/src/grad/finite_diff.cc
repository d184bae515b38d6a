// src/grad/finite_diff.cc

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

#include "hear/grad/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hear::grad {

namespace {

double evaluate(const ScalarGraphFn& f) {
  Graph<double> g;
  return f(g).value().item();
}

}  // namespace

GradCheckResult finite_diff_check(const ScalarGraphFn& f, std::span<Tensor<double>* const> point,
                                  double eps, std::span<const Coordinate> coords) {
  for (auto* t : point) t->zero_grad();
  {
    Graph<double> g;
    auto root = f(g);
    g.backward(root);
  }
  std::vector<Coordinate> all;
  if (coords.empty()) {
    for (std::size_t t = 0; t < point.size(); ++t)
      for (std::size_t e = 0; e < point[t]->size(); ++e) all.push_back({t, e});
    coords = all;
  }
  GradCheckResult result;
  for (const auto& c : coords) {
    Tensor<double>& t = *point[c.tensor];
    const double analytic = t.has_grad() ? t.grad[c.element] : 0.0;
    const double saved = t.data[c.element];
    t.data[c.element] = saved + eps;
    const double up = evaluate(f);
    t.data[c.element] = saved - eps;
    const double down = evaluate(f);
    t.data[c.element] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    ++result.checked;
    if (rel >= result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst = c;
      result.worst_analytic = analytic;
      result.worst_numeric = numeric;
    }
  }
  for (auto* t : point) t->zero_grad();
  return result;
}

std::vector<Coordinate> sample_coordinates(std::span<Tensor<double>* const> point, std::size_t count,
                                           std::uint64_t seed) {
  std::vector<Coordinate> all;
  for (std::size_t t = 0; t < point.size(); ++t)
    for (std::size_t e = 0; e < point[t]->size(); ++e) all.push_back({t, e});
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(count, all.size()));
  return all;
}

}  // namespace hear::grad
