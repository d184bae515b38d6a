// src/trainer/trainer.cc

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

#include "hear/trainer/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "hear/core/audio_io.hpp"
#include "hear/core/error.hpp"
#include "hear/core/seed.hpp"
#include "hear/embeddings/resolve.hpp"
#include "hear/model/checkpoint.hpp"

namespace hear::trainer {

namespace {

using Features = std::map<std::string, EmbeddingSequence>;

// Stream tags for derive_seed.
constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr std::uint64_t kMixupStream = 0x4D49585550ULL;

const ScoreVector& labels_of(const ManifestEntry& e, std::size_t expected_dims, int track) {
  if (!e.scores) throw ValidationError("entry '" + e.id + "' has no scores");
  if (e.scores->values.size() != expected_dims) {
    throw ValidationError("entry '" + e.id + "' has " + std::to_string(e.scores->values.size()) +
                          " score dimension(s) but track " + std::to_string(track) + " expects " +
                          std::to_string(expected_dims));
  }
  return *e.scores;
}

Features load_features(const ManifestEntry& e, const Manifest& manifest, const model::ModelConfig& m,
                       const AudioClip* audio = nullptr) {
  return embeddings::resolve_features(e, manifest, m.source_requests(), m.features, audio).by_source;
}

template <typename Real>
struct Item {
  model::ModelInputs<Real> inputs;
  ScoreVector labels;
};

struct Dataset {
  std::vector<Features> train_features;
  std::vector<ScoreVector> train_labels;
  std::vector<Features> val_features;
  std::vector<ScoreVector> val_labels;
};

Dataset load_dataset(const Manifest& manifest, const TrainConfig& cfg, const model::ModelConfig& m,
                     std::ostream* log) {
  const auto train_entries = manifest.split(Split::kTrain);
  const auto val_entries = manifest.split(Split::kVal);
  if (train_entries.empty()) throw ValidationError("manifest has no train entries");
  if (val_entries.empty()) throw ValidationError("manifest has no val entries");
  const std::size_t dims = m.output_dim();
  Dataset d;
  if (cfg.toggles.use_augmented_data) {
    for (const auto& b : m.branches) {
      if (!embeddings::is_toy_source(b.source_id)) {
        throw ValidationError("use_augmented_data needs every branch computable from audio; '" + b.source_id +
                              "' is not");
      }
    }
  }
  for (const auto* e : train_entries) {
    const auto& y = labels_of(*e, dims, cfg.track);
    d.train_features.push_back(load_features(*e, manifest, m));
    d.train_labels.push_back(y);
    if (!cfg.toggles.use_augmented_data) continue;
    if (!e->audio_path) throw ValidationError("entry '" + e->id + "' has no audio to augment");
    const AudioClip clip = read_wav(manifest.resolve(*e->audio_path));
    for (std::size_t c = 0; c < cfg.augment.copies_per_clip; ++c) {
      const auto aug = dsp::augment_clip(clip, cfg.augment, dsp::clip_seed(e->id, c));
      d.train_features.push_back(load_features(*e, manifest, m, &aug.clip));
      d.train_labels.push_back(y);
    }
  }
  for (const auto* e : val_entries) {
    d.val_labels.push_back(labels_of(*e, dims, cfg.track));
    d.val_features.push_back(load_features(*e, manifest, m));
  }
  if (log) {
    *log << "loaded " << d.train_features.size() << " training items (" << train_entries.size()
         << " clips) and " << d.val_features.size() << " validation items\n";
  }
  return d;
}

template <typename Real>
std::vector<ScoreVector> predict_all(const model::HearModel<Real>& model,
                                     const std::vector<model::ModelInputs<Real>>& inputs) {
  std::vector<ScoreVector> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(model.predict(in));
  return out;
}

double flat_smooth_l1(const std::vector<ScoreVector>& pred, const std::vector<ScoreVector>& truth, double delta) {
  std::vector<double> p, t;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    p.insert(p.end(), pred[i].values.begin(), pred[i].values.end());
    t.insert(t.end(), truth[i].values.begin(), truth[i].values.end());
  }
  return losses::smooth_l1_value(p, t, delta);
}

template <typename Real>
TrainResult run(const Dataset& data, const TrainConfig& cfg, const model::ModelConfig& mcfg,
                const TrainOptions& options) {
  std::ostream* log = options.log;
  model::HearModel<Real> net(mcfg);
  std::vector<model::ModelInputs<Real>> train_inputs, val_inputs;
  for (const auto& f : data.train_features) train_inputs.push_back(model::make_inputs<Real>(f));
  for (const auto& f : data.val_features) val_inputs.push_back(model::make_inputs<Real>(f));

  std::filesystem::create_directories(options.out_dir);
  TrainResult result;
  result.checkpoint = options.out_dir / "model.hckp";
  result.history_path = options.out_dir / "history.jsonl";
  std::ofstream history(result.history_path, std::ios::trunc);
  if (!history) throw IoError("cannot write " + result.history_path.string());

  auto metadata = [&](std::optional<std::size_t> epoch, std::optional<double> srcc) {
    return nlohmann::json{{"epoch", epoch ? nlohmann::json(*epoch) : nlohmann::json(nullptr)},
                          {"val_srcc", srcc ? nlohmann::json(*srcc) : nlohmann::json(nullptr)},
                          {"train_config", to_json(cfg)}};
  };
  model::save_checkpoint(net, result.checkpoint, metadata(std::nullopt, std::nullopt));

  losses::LossConfig loss_cfg = cfg.loss;
  if (!cfg.toggles.use_hybrid_loss) loss_cfg.beta = 0.0;
  const bool mixing = cfg.toggles.use_mixup && cfg.mixup.enabled;
  const std::size_t out_dim = mcfg.output_dim();
  metrics::ThresholdSpec val_threshold;
  val_threshold.quantile = cfg.val_tta_quantile;

  OptimizerState state;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train_inputs.size());
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed({cfg.seed, kShuffleStream, epoch}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::mt19937_64 mix_rng(derive_seed({cfg.seed, kMixupStream, epoch}));

    double sum_total = 0.0, sum_sl1 = 0.0, sum_rank = 0.0;
    std::size_t batches = 0, mixed_items = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batches) {
      const std::size_t bsz = std::min(cfg.batch_size, order.size() - start);
      try {
        grad::Graph<Real> g;
        model::Binder<Real> bind(g, true);
        std::vector<grad::Var<Real>> rows;
        std::vector<ScoreVector> labels;
        for (std::size_t k = 0; k < bsz; ++k) {
          const std::size_t idx = order[start + k];
          rows.push_back(net.fuse(bind, train_inputs[idx]));
          labels.push_back(data.train_labels[idx]);
        }
        auto x = rows.size() == 1 ? rows.front() : g.concat(rows, 0);

        // Labels, possibly mixed with the same matrix as the features.
        std::vector<double> y(bsz * out_dim);
        for (std::size_t i = 0; i < bsz; ++i)
          for (std::size_t d = 0; d < out_dim; ++d) y[i * out_dim + d] = labels[i].values[d];
        if (mixing) {
          const auto plan = mixup::plan_batch(labels, cfg.mixup, mix_rng);
          const std::size_t applied =
              std::count_if(plan.begin(), plan.end(), [](const mixup::Assignment& a) { return a.applied; });
          if (applied > 0) {
            mixed_items += applied;
            const auto m = mixup::mixing_matrix(plan);
            grad::Tensor<Real> mt(grad::Shape{bsz, bsz});
            for (std::size_t i = 0; i < m.size(); ++i) mt.data[i] = static_cast<Real>(m[i]);
            x = g.matmul(g.constant(std::move(mt)), x);
            std::vector<double> mixed(y.size(), 0.0);
            for (std::size_t i = 0; i < bsz; ++i)
              for (std::size_t j = 0; j < bsz; ++j)
                for (std::size_t d = 0; d < out_dim; ++d) mixed[i * out_dim + d] += m[i * bsz + j] * y[j * out_dim + d];
            y = std::move(mixed);
          }
        }
        grad::Tensor<Real> yt(grad::Shape{bsz, out_dim});
        for (std::size_t i = 0; i < y.size(); ++i) yt.data[i] = static_cast<Real>(y[i]);
        auto pred = net.head(bind, x);
        auto loss = losses::hybrid_loss(g, pred, g.constant(std::move(yt)), loss_cfg);
        g.backward(loss.total);
        adam_step(net, state, cfg.adam);
        net.zero_grad();
        sum_total += loss.report.total;
        sum_sl1 += loss.report.smooth_l1_component;
        sum_rank += loss.report.listmle_component;
      } catch (const NumericalError& e) {
        throw NumericalError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches) + ": " +
                             e.what());
      }
    }

    // Validate exactly what a checkpoint would hold.
    model::HearModel<Real> stored = net;
    model::round_to_stored(stored);
    const auto val_pred = predict_all(stored, val_inputs);
    const auto report = metrics::evaluate_scores(val_pred, data.val_labels, val_threshold);
    const double nb = static_cast<double>(batches);
    nlohmann::json line = {{"epoch", epoch},
                           {"train",
                            {{"total", sum_total / nb},
                             {"smooth_l1", sum_sl1 / nb},
                             {"listmle", sum_rank / nb},
                             {"batches", batches},
                             {"mixed_items", mixed_items}}},
                           {"val", metrics::to_json(report)},
                           {"val_smooth_l1", flat_smooth_l1(val_pred, data.val_labels, loss_cfg.delta)}};
    const bool improved = report.srcc.value && (!result.best_val_srcc || *report.srcc.value > *result.best_val_srcc);
    if (improved) {
      result.best_val_srcc = report.srcc.value;
      result.best_epoch = epoch;
      since_best = 0;
      model::save_checkpoint(stored, result.checkpoint, metadata(epoch, report.srcc.value));
    } else {
      ++since_best;
    }
    line["best"] = improved;
    history << line.dump() << '\n';
    history.flush();
    result.history.push_back(line);
    if (log) {
      *log << "epoch " << epoch << ": loss " << sum_total / nb << " (smooth_l1 " << sum_sl1 / nb << ", listmle "
           << sum_rank / nb << "), val srcc "
           << (report.srcc.value ? std::to_string(*report.srcc.value) : std::string("undefined"))
           << (improved ? " [best]" : "") << '\n';
    }
    if (since_best >= cfg.early_stop_patience) {
      if (log) *log << "no improvement for " << since_best << " epochs, stopping\n";
      break;
    }
  }
  return result;
}

template <typename Real>
std::vector<Prediction> predict_with(const model::CheckpointContents& ckpt, const Manifest& manifest,
                                     const std::vector<const ManifestEntry*>& entries) {
  const auto net = model::restore<Real>(ckpt);
  std::vector<Prediction> out;
  for (const auto* e : entries) {
    const auto features = load_features(*e, manifest, net.config());
    auto scores = net.predict(model::make_inputs<Real>(features));
    if (e->scores && e->scores->values.size() == scores.values.size()) {
      scores.dimension_names = e->scores->names();
    }
    out.push_back({e->id, std::move(scores)});
  }
  return out;
}

}  // namespace

TrainResult train(const Manifest& manifest, const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  validate_manifest(manifest);
  const auto mcfg = cfg.effective_model();
  const auto data = load_dataset(manifest, cfg, mcfg, options.log);
  if (cfg.precision == grad::Precision::kFloat64) return run<double>(data, cfg, mcfg, options);
  return run<float>(data, cfg, mcfg, options);
}

std::vector<Prediction> predict_entries(const std::filesystem::path& checkpoint, const Manifest& manifest,
                                        std::optional<Split> split) {
  const auto ckpt = model::read_checkpoint(checkpoint);
  std::vector<const ManifestEntry*> entries;
  if (split) {
    entries = manifest.split(*split);
  } else {
    for (const auto& e : manifest.entries) entries.push_back(&e);
  }
  if (entries.empty()) throw ValidationError("no manifest entries to score");
  const auto precision = model::model_config_from_json(ckpt.config.at("model")).precision;
  if (precision == grad::Precision::kFloat64) return predict_with<double>(ckpt, manifest, entries);
  return predict_with<float>(ckpt, manifest, entries);
}

metrics::MetricsReport evaluate(const std::filesystem::path& checkpoint, const Manifest& manifest, Split split,
                                const metrics::ThresholdSpec& threshold) {
  threshold.validate();
  const auto preds = predict_entries(checkpoint, manifest, split);
  const auto entries = manifest.split(split);
  std::vector<ScoreVector> pred, truth;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    truth.push_back(labels_of(*entries[i], preds[i].scores.values.size(),
                              preds[i].scores.values.size() == 5 ? 2 : 1));
    pred.push_back(preds[i].scores);
  }
  return metrics::evaluate_scores(pred, truth, threshold);
}

}  // namespace hear::trainer
