// src/losses/losses.cc

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

#include "hear/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hear/core/error.hpp"

namespace hear::losses {

using grad::Tensor;

LossConfig LossConfig::for_track(int track) {
  LossConfig c;
  c.beta = track == 2 ? 0.05 : 0.15;
  return c;
}

void LossConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("loss beta must be >= 0");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("loss delta must be positive");
}

nlohmann::json to_json(const LossConfig& c) {
  return {{"beta", c.beta}, {"delta", c.delta}, {"listmle_tie_rule", "by_index"}};
}

LossConfig loss_config_from_json(const nlohmann::json& j, int track) {
  LossConfig c = LossConfig::for_track(track);
  c.beta = j.value("beta", c.beta);
  c.delta = j.value("delta", c.delta);
  const auto rule = j.value("listmle_tie_rule", std::string("by_index"));
  if (rule != "by_index") throw ValidationError("unknown listmle_tie_rule '" + rule + "'");
  c.validate();
  return c;
}

double smooth_l1_value(std::span<const double> pred, std::span<const double> target, double delta) {
  if (pred.size() != target.size()) throw ValidationError("smooth_l1: shape mismatch");
  if (pred.empty()) throw ValidationError("smooth_l1: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = std::abs(pred[i] - target[i]);
    sum += e < delta ? 0.5 * e * e / delta : e - 0.5 * delta;
  }
  return sum / static_cast<double>(pred.size());
}

std::vector<std::size_t> listmle_order(std::span<const double> labels) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] > labels[b]; });
  return order;
}

namespace {

// Suffix log-sum-exp of s[order[t..n)], stable via pairwise logaddexp.
template <typename Real>
std::vector<Real> suffix_lse(const std::vector<Real>& s, const std::vector<std::size_t>& order) {
  const std::size_t n = order.size();
  std::vector<Real> lse(n);
  lse[n - 1] = s[order[n - 1]];
  for (std::size_t t = n - 1; t-- > 0;) {
    const Real a = s[order[t]], b = lse[t + 1];
    const Real hi = std::max(a, b);
    lse[t] = hi + std::log1p(std::exp(-std::abs(a - b)));
  }
  return lse;
}

template <typename Real>
Real listmle_forward(const std::vector<Real>& s, const std::vector<std::size_t>& order) {
  const auto lse = suffix_lse(s, order);
  Real total = 0;
  for (std::size_t t = 0; t < order.size(); ++t) total += lse[t] - s[order[t]];
  return total / static_cast<Real>(order.size());
}

}  // namespace

double listmle_value(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw ValidationError("listmle: length mismatch");
  if (scores.empty()) throw ValidationError("listmle: empty list");
  return listmle_forward(std::vector<double>(scores.begin(), scores.end()), listmle_order(labels));
}

template <typename Real>
Var<Real> smooth_l1(Graph<Real>& g, Var<Real> pred, Var<Real> target, Real delta) {
  const auto& p = g.value(pred);
  const auto& t = g.value(target);
  if (p.shape != t.shape) {
    throw ValidationError("smooth_l1: shape mismatch " + grad::shape_string(p.shape) + " vs " +
                          grad::shape_string(t.shape));
  }
  if (p.size() == 0) throw ValidationError("smooth_l1: empty input");
  if (!(delta > 0)) throw ValidationError("smooth_l1: delta must be positive");
  const std::size_t n = p.size();
  std::vector<Real> slope(n);  // dloss/dpred per element, before 1/n
  Real sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real e = p.data[i] - t.data[i];
    const Real a = std::abs(e);
    if (a < delta) {
      sum += Real(0.5) * e * e / delta;
      slope[i] = e / delta;
    } else {
      sum += a - Real(0.5) * delta;
      slope[i] = e > 0 ? Real(1) : Real(-1);
    }
  }
  const Real inv_n = Real(1) / static_cast<Real>(n);
  return g.record("smooth_l1", Tensor<Real>::scalar(sum * inv_n), {pred, target},
                  [pred, target, slope = std::move(slope), inv_n](Graph<Real>& gr, const std::vector<Real>& go) {
                    const Real s = go[0] * inv_n;
                    if (gr.needs_grad(pred)) {
                      auto& gp = gr.grad_buffer(pred);
                      for (std::size_t i = 0; i < slope.size(); ++i) gp[i] += s * slope[i];
                    }
                    if (gr.needs_grad(target)) {
                      auto& gt = gr.grad_buffer(target);
                      for (std::size_t i = 0; i < slope.size(); ++i) gt[i] -= s * slope[i];
                    }
                  });
}

template <typename Real>
Var<Real> listmle(Graph<Real>& g, Var<Real> scores, std::span<const double> labels) {
  const auto& sv = g.value(scores);
  if (sv.size() != labels.size()) {
    throw ValidationError("listmle: " + std::to_string(sv.size()) + " scores vs " +
                          std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw ValidationError("listmle: empty list");
  const auto order = listmle_order(labels);
  const Real loss = listmle_forward(sv.data, order);
  return g.record("listmle", Tensor<Real>::scalar(loss), {scores},
                  [scores, order](Graph<Real>& gr, const std::vector<Real>& go) {
                    if (!gr.needs_grad(scores)) return;
                    const auto& s = gr.value(scores).data;
                    const auto lse = suffix_lse(s, order);
                    const std::size_t n = order.size();
                    // d/ds_pi(u) = (1/n) (sum_{t<=u} softmax_t(u) - 1)
                    auto& gs = gr.grad_buffer(scores);
                    const Real scale = go[0] / static_cast<Real>(n);
                    for (std::size_t u = 0; u < n; ++u) {
                      const Real su = s[order[u]];
                      Real acc = 0;
                      for (std::size_t t = 0; t <= u; ++t) acc += std::exp(su - lse[t]);
                      gs[order[u]] += scale * (acc - Real(1));
                    }
                  });
}

template <typename Real>
HybridLoss<Real> hybrid_loss(Graph<Real>& g, Var<Real> pred, Var<Real> target, const LossConfig& cfg) {
  cfg.validate();
  const auto& p = g.value(pred);
  if (p.rank() != 2 || p.dim(0) == 0) {
    throw ValidationError("hybrid_loss: expected [B, K] predictions, got " + grad::shape_string(p.shape));
  }
  if (g.value(target).shape != p.shape) {
    throw ValidationError("hybrid_loss: prediction shape " + grad::shape_string(p.shape) +
                          " does not match target shape " + grad::shape_string(g.value(target).shape));
  }
  const std::size_t batch = p.dim(0), dims = p.dim(1);
  HybridLoss<Real> out;
  auto sl1 = smooth_l1(g, pred, target, static_cast<Real>(cfg.delta));
  out.report.smooth_l1_component = static_cast<double>(g.value(sl1).item());
  out.total = sl1;
  if (batch < 2) {
    out.report.total = out.report.smooth_l1_component;
    return out;
  }
  std::vector<Var<Real>> per_dim;
  const auto& t = g.value(target);
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> labels(batch);
    for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<double>(t.data[i * dims + d]);
    per_dim.push_back(g.reshape(listmle(g, dims == 1 ? pred : g.slice(pred, 1, d, 1), labels), {1}));
  }
  auto rank = g.mean_all(per_dim.size() == 1 ? per_dim.front() : g.concat(per_dim, 0));
  out.report.listmle_component = static_cast<double>(g.value(rank).item());
  if (cfg.beta > 0.0) out.total = g.add(sl1, g.scale(rank, static_cast<Real>(cfg.beta)));
  out.report.total = static_cast<double>(g.value(out.total).item());
  return out;
}

template Var<float> smooth_l1<float>(Graph<float>&, Var<float>, Var<float>, float);
template Var<double> smooth_l1<double>(Graph<double>&, Var<double>, Var<double>, double);
template Var<float> listmle<float>(Graph<float>&, Var<float>, std::span<const double>);
template Var<double> listmle<double>(Graph<double>&, Var<double>, std::span<const double>);
template HybridLoss<float> hybrid_loss<float>(Graph<float>&, Var<float>, Var<float>, const LossConfig&);
template HybridLoss<double> hybrid_loss<double>(Graph<double>&, Var<double>, Var<double>, const LossConfig&);

}  // namespace hear::losses
