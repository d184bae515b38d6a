// src/metrics/metrics.cc

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

#include "hear/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace hear::metrics {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> truth, const char* name) {
  if (pred.size() != truth.size()) {
    throw ValidationError(std::string(name) + ": length mismatch (" + std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()) + ")");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i]) || !std::isfinite(truth[i])) {
      throw ValidationError(std::string(name) + ": non-finite value at index " + std::to_string(i));
    }
  }
  if (pred.size() < 2) {
    throw UndefinedMetricError(std::string(name) + " undefined: needs n >= 2, got " + std::to_string(pred.size()));
  }
}

double pearson(std::span<const double> a, std::span<const double> b, const char* name) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedMetricError(std::string(name) + " undefined: zero variance input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// Pairs tied within each run of equal values in a sorted sequence.
template <typename It, typename Eq>
std::int64_t tied_pairs(It begin, It end, Eq eq) {
  std::int64_t total = 0;
  for (It run = begin; run != end;) {
    It next = run;
    while (next != end && eq(*next, *run)) ++next;
    const auto t = static_cast<std::int64_t>(next - run);
    total += t * (t - 1) / 2;
    run = next;
  }
  return total;
}

// Merge sort on `v`, returning the number of inversions (strictly greater
// element before a smaller one).
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace

double lcc(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, "lcc");
  return pearson(pred, truth, "lcc");
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && x[idx[j]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of positions i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

double srcc(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, "srcc");
  const auto rp = average_ranks(pred);
  const auto rt = average_ranks(truth);
  return pearson(rp, rt, "srcc");
}

double ktau(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, "ktau");
  const std::size_t n = pred.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return truth[a] != truth[b] ? truth[a] < truth[b] : pred[a] < pred[b];
  });
  const auto ni = static_cast<std::int64_t>(n);
  const std::int64_t n0 = ni * (ni - 1) / 2;
  const std::int64_t truth_ties =
      tied_pairs(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return truth[a] == truth[b]; });
  const std::int64_t joint_ties = tied_pairs(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return truth[a] == truth[b] && pred[a] == pred[b];
  });
  std::vector<double> y(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = pred[idx[i]];
  // Sorted by truth then pred, so every inversion is a discordant pair.
  const std::int64_t discordant = count_inversions(y, buf, 0, n);
  const std::int64_t pred_ties = tied_pairs(y.begin(), y.end(), [](double a, double b) { return a == b; });
  const std::int64_t concordant_minus_discordant = n0 - truth_ties - pred_ties + joint_ties - 2 * discordant;
  // (C + D + T_pred) = pairs not tied in truth; (C + D + T_truth) likewise.
  const std::int64_t untied_truth = n0 - truth_ties;
  const std::int64_t untied_pred = n0 - pred_ties;
  if (untied_truth == 0 || untied_pred == 0) throw UndefinedMetricError("ktau undefined: all pairs tied");
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(untied_truth) * static_cast<double>(untied_pred));
}

double tta(std::span<const double> pred, std::span<const double> truth, double tau) {
  if (pred.size() != truth.size()) throw ValidationError("tta: length mismatch");
  if (pred.empty()) throw ValidationError("tta: empty input");
  if (!std::isfinite(tau)) throw ValidationError("tta: threshold must be finite");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] >= tau, t = truth[i] >= tau;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  if (tp + fp + fn == 0) return 1.0;
  // Equals 2PR/(P+R), and 0 when there is no true positive.
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double quantile(std::span<const double> x, double q) {
  if (x.empty()) throw ValidationError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

void ThresholdSpec::validate() const {
  if (value.has_value() == quantile.has_value()) {
    throw ValidationError("give exactly one of a TTA threshold or a TTA quantile");
  }
  if (value && !std::isfinite(*value)) throw ValidationError("TTA threshold must be finite");
  if (quantile && !(*quantile >= 0.0 && *quantile <= 1.0)) throw ValidationError("TTA quantile must lie in [0, 1]");
}

namespace {

template <typename Fn>
Metric guarded(Fn fn) {
  Metric m;
  try {
    m.value = fn();
  } catch (const UndefinedMetricError& e) {
    m.error = e.what();
  }
  return m;
}

Metric mean_of(const std::vector<DimensionReport>& dims, Metric DimensionReport::*field) {
  Metric m;
  double sum = 0.0;
  for (const auto& d : dims) {
    const Metric& v = d.*field;
    if (!v.value) {
      m.error = d.name + ": " + v.error;
      return m;
    }
    sum += *v.value;
  }
  m.value = sum / static_cast<double>(dims.size());
  return m;
}

nlohmann::json metric_json(const Metric& m) { return m.value ? nlohmann::json(*m.value) : nlohmann::json(nullptr); }

}  // namespace

MetricsReport evaluate_scores(std::span<const ScoreVector> pred, std::span<const ScoreVector> truth,
                              const ThresholdSpec& threshold) {
  threshold.validate();
  if (pred.size() != truth.size()) throw ValidationError("evaluate: prediction and truth counts differ");
  if (pred.empty()) throw ValidationError("evaluate: no items");
  const std::size_t dims = truth.front().values.size();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].values.size() != dims || truth[i].values.size() != dims) {
      throw ValidationError("evaluate: item " + std::to_string(i) + " has mismatched score dimensions");
    }
  }
  MetricsReport r;
  r.n = pred.size();
  r.threshold = threshold;
  const auto names = truth.front().names();
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> p(r.n), t(r.n);
    for (std::size_t i = 0; i < r.n; ++i) {
      p[i] = pred[i].values[d];
      t[i] = truth[i].values[d];
    }
    DimensionReport dr;
    dr.name = names[d];
    dr.lcc = guarded([&] { return lcc(p, t); });
    dr.srcc = guarded([&] { return srcc(p, t); });
    dr.ktau = guarded([&] { return ktau(p, t); });
    dr.tta_threshold = threshold.value ? *threshold.value : quantile(t, *threshold.quantile);
    dr.tta = tta(p, t, dr.tta_threshold);
    r.per_dimension.push_back(std::move(dr));
  }
  r.lcc = mean_of(r.per_dimension, &DimensionReport::lcc);
  r.srcc = mean_of(r.per_dimension, &DimensionReport::srcc);
  r.ktau = mean_of(r.per_dimension, &DimensionReport::ktau);
  for (const auto& d : r.per_dimension) r.tta += d.tta;
  r.tta /= static_cast<double>(dims);
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["lcc"] = metric_json(r.lcc);
  j["srcc"] = metric_json(r.srcc);
  j["ktau"] = metric_json(r.ktau);
  j["tta"] = r.tta;
  j["n"] = r.n;
  if (r.threshold.value) {
    j["tta_threshold"] = *r.threshold.value;
  } else {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& d : r.per_dimension) values.push_back(d.tta_threshold);
    j["tta_threshold"] = {{"quantile", r.threshold.quantile.value_or(0.0)}, {"values", values}};
  }
  nlohmann::json dims = nlohmann::json::array();
  nlohmann::json errors = nlohmann::json::object();
  for (const auto& d : r.per_dimension) {
    dims.push_back({{"name", d.name},
                    {"lcc", metric_json(d.lcc)},
                    {"srcc", metric_json(d.srcc)},
                    {"ktau", metric_json(d.ktau)},
                    {"tta", d.tta},
                    {"tta_threshold", d.tta_threshold}});
  }
  j["per_dimension"] = dims;
  for (const auto& [key, m] : {std::pair{"lcc", &r.lcc}, std::pair{"srcc", &r.srcc}, std::pair{"ktau", &r.ktau}}) {
    if (!m->value) errors[key] = m->error;
  }
  if (!errors.empty()) j["errors"] = errors;
  return j;
}

}  // namespace hear::metrics
