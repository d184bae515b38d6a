// tests/test_trainer.cc

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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "hear/core/error.hpp"
#include "hear/model/checkpoint.hpp"
#include "hear/trainer/adam.hpp"
#include "hear/trainer/trainer.hpp"
#include "near.hpp"
#include "synth.hpp"

using namespace hear;
using namespace hear::trainer;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / "hear_test_trainer" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// A small corpus shared by the training cases.
const Manifest& tiny_corpus() {
  static const Manifest m = [] {
    testing::SynthOptions opt;
    opt.train = 16;
    opt.val = 8;
    opt.duration_s = 1.0;
    opt.seed = 11;
    return testing::write_synthetic_dataset(scratch("corpus"), opt);
  }();
  return m;
}

TrainConfig tiny_config() {
  auto j = nlohmann::json::parse(R"({
    "learning_rate": 1e-3, "batch_size": 4, "max_epochs": 2, "early_stop_patience": 5, "seed": 3,
    "model": {"head_hidden": 16,
              "branches": [
                {"source_id": "toy-logmel", "scale": "segment", "model_dim": 8, "attention_heads": 2, "pooling_queries": 2},
                {"source_id": "toy-track", "scale": "track", "model_dim": 8, "attention_heads": 2, "pooling_queries": 2}]}})");
  return train_config_from_json(j);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("adam step") {
  auto one_step = [](double w, double g, double lr, double wd) {
    grad::Tensor<double> t(grad::Shape{1});
    t.data[0] = w;
    t.grad = {g};
    OptimizerState state;
    AdamConfig cfg;
    cfg.learning_rate = lr;
    cfg.weight_decay = wd;
    const std::vector<ParamSlot<double>> slots = {{"w", &t}};
    adam_step<double>(slots, state, cfg);
    CHECK(state.t == 1);
    return t.data[0];
  };
  CHECK_NEAR(one_step(1.0, 1.0, 0.1, 0.0), 0.9, 1e-9);
  CHECK_NEAR(one_step(1.0, 1.0, 0.1, 1e-3), 0.8999, 1e-6);
  CHECK(one_step(0.37, 0.0, 0.1, 0.0) == 0.37);

  SUBCASE("zero gradients decay by exactly (1 - lr wd)^n") {
    grad::Tensor<double> a(grad::Shape{3}), b(grad::Shape{2});
    a.data = {1.0, -2.0, 0.5};
    b.data = {3.0, 4.0};
    const auto a0 = a.data, b0 = b.data;
    AdamConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.weight_decay = 0.1;
    OptimizerState state;
    const std::vector<ParamSlot<double>> slots = {{"a", &a}, {"b", &b}};
    for (int n = 0; n < 50; ++n) {
      a.grad.assign(3, 0.0);  // b has no gradient buffer: treated as zero
      adam_step<double>(slots, state, cfg);
    }
    const double factor = std::pow(1.0 - 0.01 * 0.1, 50);
    for (std::size_t i = 0; i < 3; ++i) CHECK_NEAR(a.data[i], a0[i] * factor, 1e-12);
    for (std::size_t i = 0; i < 2; ++i) CHECK_NEAR(b.data[i], b0[i] * factor, 1e-12);
    REQUIRE(state.m.size() == 2);
    CHECK(state.m[0].size() == 3);
    CHECK(state.v[1].size() == 2);
  }

  SUBCASE("non-finite gradient names the tensor and changes nothing") {
    grad::Tensor<float> a(grad::Shape{2}), b(grad::Shape{2});
    a.data = {1.0f, 2.0f};
    b.data = {3.0f, 4.0f};
    a.grad = {0.5f, 0.5f};
    b.grad = {0.0f, std::numeric_limits<float>::quiet_NaN()};
    OptimizerState state;
    const std::vector<ParamSlot<float>> slots = {{"first", &a}, {"second.weight", &b}};
    CHECK_THROWS_WITH_AS(adam_step<float>(slots, state, AdamConfig{}), doctest::Contains("second.weight"),
                         NumericalError);
    CHECK(a.data == std::vector<float>{1.0f, 2.0f});
    CHECK(b.data == std::vector<float>{3.0f, 4.0f});
  }

  SUBCASE("config validation") {
    AdamConfig c;
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.beta1 = 1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }
}

TEST_CASE("training config") {
  const TrainConfig d;
  CHECK(d.adam.learning_rate == 1e-5);
  CHECK(d.adam.weight_decay == 1e-3);
  CHECK(d.batch_size == 8);
  CHECK(d.adam.beta1 == 0.9);
  CHECK(d.adam.beta2 == 0.999);
  CHECK(d.adam.eps == 1e-8);

  const auto c = tiny_config();
  CHECK(train_config_from_json(to_json(c)).model.branches.size() == 2);
  CHECK(to_json(train_config_from_json(to_json(c))) == to_json(c));
  CHECK(train_config_from_json(nlohmann::json::object(), 2).track == 2);

  auto bad = to_json(c);
  bad["batch_size"] = 0;
  CHECK_THROWS_AS(train_config_from_json(bad).validate(), ValidationError);
  bad = to_json(c);
  bad["early_stop_patience"] = 0;
  CHECK_THROWS_AS(train_config_from_json(bad).validate(), ValidationError);
  bad = to_json(c);
  bad["toggles"]["branches_enabled"] = {"nope"};
  CHECK_THROWS_WITH_AS(train_config_from_json(bad).validate(), doctest::Contains("nope"), ValidationError);

  auto single = c;
  single.toggles.branches_enabled = {"toy-track"};
  REQUIRE(single.effective_model().branches.size() == 1);
  CHECK(single.effective_model().branches[0].source_id == "toy-track");
}

TEST_CASE("zero epochs saves the initialization") {
  auto cfg = tiny_config();
  cfg.max_epochs = 0;
  cfg.precision = grad::Precision::kFloat64;
  const auto out = scratch("zero");
  const auto r = train(tiny_corpus(), cfg, {out});
  CHECK(r.history.empty());
  CHECK(slurp(r.history_path).empty());
  CHECK_FALSE(r.best_epoch.has_value());
  model::HearModel<double> init(cfg.effective_model());
  model::round_to_stored(init);
  const auto loaded = model::load_checkpoint<double>(r.checkpoint);
  REQUIRE(loaded.parameters().size() == init.parameters().size());
  for (std::size_t k = 0; k < init.parameters().size(); ++k) {
    CHECK(loaded.parameters()[k].name == init.parameters()[k].name);
    CHECK(loaded.parameters()[k].tensor.data == init.parameters()[k].tensor.data);
  }
}

TEST_CASE("seeded runs are bit-identical in 64-bit mode") {
  auto cfg = tiny_config();
  cfg.precision = grad::Precision::kFloat64;
  cfg.toggles.use_augmented_data = true;
  cfg.augment.copies_per_clip = 1;
  const auto a = train(tiny_corpus(), cfg, {scratch("det_a")});
  const auto b = train(tiny_corpus(), cfg, {scratch("det_b")});
  REQUIRE(a.history.size() == 2);
  CHECK(slurp(a.history_path) == slurp(b.history_path));
  CHECK(slurp(a.checkpoint) == slurp(b.checkpoint));

  cfg.seed += 1;
  const auto c = train(tiny_corpus(), cfg, {scratch("det_c")});
  CHECK(slurp(a.history_path) != slurp(c.history_path));
}

TEST_CASE("history, best checkpoint and evaluation") {
  auto cfg = tiny_config();
  cfg.max_epochs = 4;
  std::ostringstream log;
  const auto r = train(tiny_corpus(), cfg, {scratch("hist"), &log});
  REQUIRE(r.history.size() == 4);
  CHECK(log.str().find("epoch 3") != std::string::npos);

  double best = -2.0;
  for (const auto& line : r.history) {
    for (const char* key : {"total", "smooth_l1", "listmle", "batches", "mixed_items"}) {
      CHECK_MESSAGE(line.at("train").contains(key), key);
    }
    CHECK(line.at("train").at("batches") == 4);
    for (const char* key : {"lcc", "srcc", "ktau", "tta"}) CHECK_MESSAGE(line.at("val").contains(key), key);
    CHECK(line.contains("val_smooth_l1"));
    if (line.at("val").at("srcc").is_number()) best = std::max(best, line.at("val").at("srcc").get<double>());
  }
  REQUIRE(r.best_val_srcc.has_value());
  CHECK(*r.best_val_srcc == best);
  CHECK(r.history.at(*r.best_epoch).at("best") == true);

  const auto ckpt = model::read_checkpoint(r.checkpoint);
  CHECK(ckpt.config.at("meta").at("epoch") == *r.best_epoch);

  metrics::ThresholdSpec q;
  q.quantile = cfg.val_tta_quantile;
  const auto report = evaluate(r.checkpoint, tiny_corpus(), Split::kVal, q);
  CHECK_NEAR(*report.srcc.value, best, 1e-9);
  CHECK_NEAR(report.tta, r.history.at(*r.best_epoch).at("val").at("tta").get<double>(), 1e-9);

  SUBCASE("predictions cover the requested split in manifest order") {
    const auto preds = predict_entries(r.checkpoint, tiny_corpus(), Split::kVal);
    const auto val = tiny_corpus().split(Split::kVal);
    REQUIRE(preds.size() == val.size());
    for (std::size_t i = 0; i < preds.size(); ++i) CHECK(preds[i].id == val[i]->id);
    CHECK(predict_entries(r.checkpoint, tiny_corpus(), std::nullopt).size() == tiny_corpus().entries.size());
  }

  SUBCASE("a one-item split has undefined correlations but a defined F1") {
    Manifest one = tiny_corpus();
    bool kept = false;
    for (auto& e : one.entries) {
      if (e.split != Split::kVal) continue;
      if (kept) e.split = Split::kTest;
      kept = true;
    }
    metrics::ThresholdSpec t;
    t.value = 3.0;
    const auto single = evaluate(r.checkpoint, one, Split::kVal, t);
    CHECK(single.n == 1);
    CHECK_FALSE(single.srcc.value.has_value());
    CHECK_FALSE(single.lcc.value.has_value());
    CHECK_FALSE(single.ktau.value.has_value());
    CHECK(std::isfinite(single.tta));
  }
}

TEST_CASE("every toggle combination trains") {
  const auto base = tiny_config();
  int run = 0;
  for (bool mix : {false, true}) {
    for (bool hybrid : {false, true}) {
      for (const std::vector<std::string>& branches :
           {std::vector<std::string>{}, std::vector<std::string>{"toy-logmel"}}) {
        auto cfg = base;
        cfg.max_epochs = 1;
        cfg.toggles.use_mixup = mix;
        cfg.toggles.use_hybrid_loss = hybrid;
        cfg.toggles.branches_enabled = branches;
        CAPTURE(mix);
        CAPTURE(hybrid);
        CAPTURE(branches.size());
        const auto r = train(tiny_corpus(), cfg, {scratch("toggle" + std::to_string(run++))});
        REQUIRE(r.history.size() == 1);
        const auto& t = r.history[0].at("train");
        CHECK(std::isfinite(t.at("total").get<double>()));
        if (!mix) CHECK(t.at("mixed_items") == 0);
        if (!hybrid) CHECK(t.at("total").get<double>() == t.at("smooth_l1").get<double>());
        const auto ckpt = model::read_checkpoint(r.checkpoint);
        const auto mc = model::model_config_from_json(ckpt.config.at("model"));
        CHECK(mc.branches.size() == (branches.empty() ? 2 : 1));
      }
    }
  }
}

TEST_CASE("mixup does not affect evaluation") {
  auto cfg = tiny_config();
  cfg.max_epochs = 1;
  const auto r = train(tiny_corpus(), cfg, {scratch("mixeval")});
  metrics::ThresholdSpec t;
  t.value = 3.0;
  const auto a = evaluate(r.checkpoint, tiny_corpus(), Split::kVal, t);
  // Evaluation reads only the checkpoint; the training toggles are not consulted.
  const auto b = evaluate(r.checkpoint, tiny_corpus(), Split::kVal, t);
  CHECK(*a.srcc.value == *b.srcc.value);
  CHECK(a.tta == b.tta);
}

TEST_CASE("training errors") {
  const auto cfg = tiny_config();
  SUBCASE("missing splits") {
    Manifest no_val = tiny_corpus();
    for (auto& e : no_val.entries) e.split = Split::kTrain;
    CHECK_THROWS_WITH_AS(train(no_val, cfg, {scratch("err")}), doctest::Contains("no val"), ValidationError);
    Manifest no_train = tiny_corpus();
    for (auto& e : no_train.entries) e.split = Split::kVal;
    CHECK_THROWS_WITH_AS(train(no_train, cfg, {scratch("err")}), doctest::Contains("no train"), ValidationError);
  }
  SUBCASE("track mismatch") {
    auto t2 = train_config_from_json(to_json(cfg), 2);
    CHECK_THROWS_AS(train(tiny_corpus(), t2, {scratch("err")}), ValidationError);
  }
  SUBCASE("non-finite labels are rejected") {
    Manifest bad = tiny_corpus();
    for (auto& e : bad.entries) {
      if (e.split == Split::kTrain) {
        e.scores->values[0] = std::numeric_limits<double>::infinity();
        break;
      }
    }
    CHECK_THROWS_AS(train(bad, cfg, {scratch("err")}), ValidationError);
  }
  SUBCASE("divergence reports epoch and batch") {
    // One step of this size pushes float32 weights past overflow.
    auto wild = cfg;
    wild.adam.learning_rate = 1e38;
    try {
      train(tiny_corpus(), wild, {scratch("err")});
      FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
      const std::string what = e.what();
      CHECK(what.find("epoch 0, batch 1") != std::string::npos);
    }
  }
}
