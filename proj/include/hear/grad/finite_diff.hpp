// include/hear/grad/finite_diff.hpp

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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hear/grad/graph.hpp"

namespace hear::grad {

// (tensor index into the point list, element index)
struct Coordinate {
  std::size_t tensor = 0;
  std::size_t element = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  Coordinate worst;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// Builds a scalar from tensors bound with graph.parameter(*point[i]).
using ScalarGraphFn = std::function<Var<double>(Graph<double>&)>;

/// Compares backward() against central differences (f(x+e) - f(x-e)) / 2e.
///
/// Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-8). The point
/// tensors are perturbed in place and restored. An empty `coords` checks
/// every element of every tensor.
GradCheckResult finite_diff_check(const ScalarGraphFn& f, std::span<Tensor<double>* const> point,
                                  double eps, std::span<const Coordinate> coords = {});

// `count` distinct coordinates drawn uniformly over all elements.
std::vector<Coordinate> sample_coordinates(std::span<Tensor<double>* const> point, std::size_t count,
                                           std::uint64_t seed);

}  // namespace hear::grad
