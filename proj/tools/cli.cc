// tools/cli.cc

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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hear/core/audio_io.hpp"
#include "hear/core/embedding_io.hpp"
#include "hear/core/error.hpp"
#include "hear/core/manifest.hpp"
#include "hear/dsp/augment.hpp"
#include "hear/embeddings/resolve.hpp"
#include "hear/embeddings/toy_features.hpp"
#include "hear/trainer/trainer.hpp"

namespace hear::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string absolute_path(const Manifest& m, const std::string& p) {
  return fs::absolute(m.resolve(p)).lexically_normal().string();
}

// Entry with every path made absolute, so the manifest can live anywhere.
ManifestEntry rebased(const Manifest& m, const ManifestEntry& e) {
  ManifestEntry out = e;
  if (out.audio_path) out.audio_path = absolute_path(m, *out.audio_path);
  for (auto& [source, path] : out.embedding_paths) path = absolute_path(m, path);
  return out;
}

// File-name-safe version of an id.
std::string file_stem(const std::string& id) {
  std::string s = id;
  for (char& c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return s;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct AugmentArgs {
  std::string manifest, out_dir, config, disable;
  std::uint64_t seed = 0;
  std::size_t copies = 1;
  bool all_splits = false;
};

int cmd_augment(const AugmentArgs& a, std::ostream& out, std::ostream& err) {
  const auto manifest = load_manifest(a.manifest);
  dsp::AugmentConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw IoError("cannot open augment config " + a.config);
    cfg = dsp::augment_config_from_json(nlohmann::json::parse(in));
  }
  cfg.seed = a.seed;
  cfg.copies_per_clip = a.copies;
  for (const auto& name : split_list(a.disable)) cfg.disable(dsp::op_from_name(name));
  cfg.validate();

  fs::create_directories(a.out_dir);
  Manifest result;
  result.base_dir = fs::absolute(a.out_dir);
  std::size_t written = 0;
  for (const auto& e : manifest.entries) {
    result.entries.push_back(rebased(manifest, e));
    if (!e.audio_path || (!a.all_splits && e.split != Split::kTrain)) continue;
    const auto clip = read_wav(manifest.resolve(*e.audio_path));
    for (std::size_t c = 0; c < cfg.copies_per_clip; ++c) {
      const auto seed = dsp::clip_seed(e.id, c);
      const auto aug = dsp::augment_clip(clip, cfg, seed);
      const std::string stem = file_stem(e.id) + ".aug" + std::to_string(c);
      const fs::path wav = fs::path(a.out_dir) / (stem + ".wav");
      write_wav(aug.clip, wav);
      nlohmann::json draws = nlohmann::json::array();
      for (const auto& d : aug.draws) draws.push_back(dsp::to_json(d));
      const nlohmann::json sidecar = {{"source_id", e.id},
                                      {"copy", c},
                                      {"clip_seed", seed},
                                      {"config", dsp::to_json(cfg)},
                                      {"draws", draws}};
      std::ofstream js(fs::path(a.out_dir) / (stem + ".json"));
      if (!js) throw IoError("cannot write sidecar for " + stem);
      js << sidecar.dump(2) << '\n';

      ManifestEntry copy;
      copy.id = e.id + ".aug" + std::to_string(c);
      copy.audio_path = fs::absolute(wav).string();
      copy.scores = e.scores;
      copy.split = e.split;
      result.entries.push_back(std::move(copy));
      ++written;
    }
  }
  const fs::path out_manifest = fs::path(a.out_dir) / "manifest.jsonl";
  save_manifest(result, out_manifest);
  err << "wrote " << written << " augmented clips\n";
  out << out_manifest.string() << '\n';
  return 0;
}

struct FeaturesArgs {
  std::string manifest, out_dir, extractor = "toy";
  embeddings::FeatureConfig features;
};

int cmd_features(const FeaturesArgs& a, std::ostream& out, std::ostream& err) {
  if (a.extractor != "toy") throw UsageError("unknown extractor '" + a.extractor + "' (only 'toy' is built in)");
  const auto manifest = load_manifest(a.manifest);
  fs::create_directories(a.out_dir);
  const std::vector<embeddings::SourceRequest> sources = {
      {std::string(embeddings::kToyLogmelSource), Scale::kSegment},
      {std::string(embeddings::kToyTrackSource), Scale::kTrack}};
  Manifest result;
  result.base_dir = fs::absolute(a.out_dir);
  std::size_t files = 0;
  for (const auto& e : manifest.entries) {
    auto entry = rebased(manifest, e);
    if (e.audio_path) {
      const auto clip = read_wav(manifest.resolve(*e.audio_path));
      for (const auto& [source, seq] : embeddings::toy_features(clip, sources, a.features)) {
        const fs::path path = fs::path(a.out_dir) / (file_stem(e.id) + "." + source + ".hemb");
        write_embedding(seq, path);
        entry.embedding_paths[source] = fs::absolute(path).string();
        ++files;
      }
    } else {
      err << "entry '" << e.id << "' has no audio; left unchanged\n";
    }
    result.entries.push_back(std::move(entry));
  }
  const fs::path out_manifest = fs::path(a.out_dir) / "manifest.jsonl";
  save_manifest(result, out_manifest);
  err << "wrote " << files << " embedding files\n";
  out << out_manifest.string() << '\n';
  return 0;
}

struct TrainArgs {
  std::string manifest, config, out, precision, branches;
  int track = 0;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  bool no_mixup = false, augmented = false, smooth_l1_only = false, quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const auto manifest = load_manifest(a.manifest);
  nlohmann::json j = nlohmann::json::object();
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw IoError("cannot open training config " + a.config);
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("training config " + a.config + " is not valid JSON: " + e.what());
    }
  }
  // Flags override the file.
  if (a.epochs) j["max_epochs"] = *a.epochs;
  if (a.seed) j["seed"] = *a.seed;
  if (a.learning_rate) j["learning_rate"] = *a.learning_rate;
  if (!a.precision.empty()) j["precision"] = a.precision;
  if (a.no_mixup) j["toggles"]["use_mixup"] = false;
  if (a.augmented) j["toggles"]["use_augmented_data"] = true;
  if (a.smooth_l1_only) j["toggles"]["use_hybrid_loss"] = false;
  if (!a.branches.empty()) j["toggles"]["branches_enabled"] = split_list(a.branches);
  const auto cfg = trainer::train_config_from_json(j, a.track);

  trainer::TrainOptions options;
  options.out_dir = a.out;
  options.log = a.quiet ? nullptr : &err;
  const auto result = trainer::train(manifest, cfg, options);
  nlohmann::json summary = {{"checkpoint", result.checkpoint.string()},
                            {"history", result.history_path.string()},
                            {"epochs", result.history.size()}};
  summary["best_epoch"] = result.best_epoch ? nlohmann::json(*result.best_epoch) : nlohmann::json(nullptr);
  summary["best_val_srcc"] = result.best_val_srcc ? nlohmann::json(*result.best_val_srcc) : nlohmann::json(nullptr);
  out << summary.dump() << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint, manifest, split = "test";
  std::optional<double> threshold, quantile;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream&) {
  metrics::ThresholdSpec spec;
  spec.value = a.threshold;
  spec.quantile = a.quantile;
  if (spec.value.has_value() == spec.quantile.has_value()) {
    throw UsageError("eval needs exactly one of --tta-threshold or --tta-quantile");
  }
  const auto manifest = load_manifest(a.manifest);
  const auto report = trainer::evaluate(a.checkpoint, manifest, split_from_string(a.split), spec);
  out << metrics::to_json(report).dump(2) << '\n';
  return 0;
}

struct RankArgs {
  std::string checkpoint, manifest, dimension, split;
};

int cmd_rank(const RankArgs& a, std::ostream& out, std::ostream&) {
  const auto manifest = load_manifest(a.manifest);
  std::optional<Split> split;
  if (!a.split.empty()) split = split_from_string(a.split);
  auto preds = trainer::predict_entries(a.checkpoint, manifest, split);
  std::size_t dim = 0;
  if (!a.dimension.empty()) {
    const auto names = preds.front().scores.names();
    const auto it = std::find(names.begin(), names.end(), a.dimension);
    if (it == names.end()) throw ValidationError("unknown dimension '" + a.dimension + "'");
    dim = static_cast<std::size_t>(it - names.begin());
  }
  std::sort(preds.begin(), preds.end(), [dim](const trainer::Prediction& x, const trainer::Prediction& y) {
    const double a = x.scores.values[dim], b = y.scores.values[dim];
    return a != b ? a > b : x.id < y.id;
  });
  for (const auto& p : preds) out << p.id << '\t' << format_score(p.scores.values[dim]) << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Song aesthetics scoring toolkit"};
  app.require_subcommand(1);

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "Write augmented copies of the audio in a manifest");
  augment->add_option("--manifest", aug.manifest, "Input manifest (JSON lines)")->required();
  augment->add_option("--out-dir", aug.out_dir, "Output directory")->required();
  augment->add_option("--seed", aug.seed, "Augmentation seed");
  augment->add_option("--copies", aug.copies, "Copies per clip");
  augment->add_option("--disable", aug.disable, "Comma-separated ops to switch off");
  augment->add_option("--config", aug.config, "JSON file with op ranges and probabilities");
  augment->add_flag("--all-splits", aug.all_splits, "Augment val/test entries too");

  FeaturesArgs feat;
  auto* features = app.add_subcommand("features", "Compute embedding files for every entry");
  features->add_option("--manifest", feat.manifest, "Input manifest")->required();
  features->add_option("--out-dir", feat.out_dir, "Output directory")->required();
  features->add_option("--extractor", feat.extractor, "Feature extractor");
  features->add_option("--n-mels", feat.features.n_mels, "Mel bands");
  features->add_option("--hop-s", feat.features.hop_s, "Frame hop in seconds");
  features->add_option("--track-window-s", feat.features.track_window_s, "Track statistics window in seconds");

  TrainArgs tr;
  auto* trn = app.add_subcommand("train", "Train a model");
  trn->add_option("--manifest", tr.manifest, "Manifest with train and val splits")->required();
  trn->add_option("--config", tr.config, "Training config JSON");
  trn->add_option("--track", tr.track, "Challenge track (1 or 2)")->check(CLI::IsMember({1, 2}));
  trn->add_option("--out", tr.out, "Output directory for model.hckp and history.jsonl")->required();
  trn->add_option("--epochs", tr.epochs, "Override max_epochs");
  trn->add_option("--seed", tr.seed, "Override seed");
  trn->add_option("--lr", tr.learning_rate, "Override learning rate");
  trn->add_option("--precision", tr.precision, "float32 or float64");
  trn->add_flag("--no-mixup", tr.no_mixup, "Disable feature-level mixup");
  trn->add_flag("--augmented-data", tr.augmented, "Add augmented audio copies to the train split");
  trn->add_flag("--smooth-l1-only", tr.smooth_l1_only, "Drop the ranking term");
  trn->add_option("--branches", tr.branches, "Comma-separated branch sources to keep");
  trn->add_flag("--quiet", tr.quiet, "No progress output");

  EvalArgs ev;
  auto* evl = app.add_subcommand("eval", "Score a split and print metrics as JSON");
  evl->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  evl->add_option("--manifest", ev.manifest, "Manifest")->required();
  evl->add_option("--split", ev.split, "train, val or test");
  evl->add_option("--tta-threshold", ev.threshold, "Fixed TTA threshold");
  evl->add_option("--tta-quantile", ev.quantile, "TTA threshold as a quantile of ground truth");

  RankArgs rk;
  auto* rnk = app.add_subcommand("rank", "Print entries sorted by predicted score (TSV)");
  rnk->add_option("--checkpoint", rk.checkpoint, "Checkpoint file")->required();
  rnk->add_option("--manifest", rk.manifest, "Manifest")->required();
  rnk->add_option("--dimension", rk.dimension, "Score dimension to sort by");
  rnk->add_option("--split", rk.split, "Restrict to one split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : static_cast<int>(ErrorKind::kUsage);
  }

  try {
    if (*augment) return cmd_augment(aug, out, err);
    if (*features) return cmd_features(feat, out, err);
    if (*trn) return cmd_train(tr, out, err);
    if (*evl) return cmd_eval(ev, out, err);
    if (*rnk) return cmd_rank(rk, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kIo);
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kValidation);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kValidation);
  }
  return static_cast<int>(ErrorKind::kUsage);
}

}  // namespace hear::cli
