// include/hear/grad/tensor.hpp

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
#include <cstdint>
#include <string>
#include <vector>

namespace hear::grad {

using Shape = std::vector<std::size_t>;

// Number of elements; an empty shape is a scalar.
std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// 1 marks a valid position, 0 a padded one.
using Mask = std::vector<std::uint8_t>;

/// Dense row-major array plus an optional gradient buffer.
///
/// `grad` stays empty until something accumulates into it, so an empty
/// buffer reads as "no gradient yet".
template <typename Real>
struct Tensor {
  Shape shape;
  std::vector<Real> data;
  bool requires_grad = false;
  std::vector<Real> grad;

  Tensor() = default;
  explicit Tensor(Shape s, Real fill = Real(0));
  Tensor(Shape s, std::vector<Real> values);

  static Tensor scalar(Real v) { return Tensor(Shape{}, std::vector<Real>{v}); }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t axis) const { return shape.at(axis); }
  Real item() const;

  bool has_grad() const { return !grad.empty(); }
  void zero_grad() { grad.clear(); }
  // Adds `g` into `grad`, allocating on first use.
  void accumulate_grad(const std::vector<Real>& g);
};

// 64-bit for verification runs, 32-bit for training runs.
enum class Precision { kFloat32, kFloat64 };

}  // namespace hear::grad
