// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "artrec/error.hpp"
#include "artrec/trainer.hpp"

using namespace artrec;

namespace {

// Tiny network over a 4-token vocabulary (blank, silence, two phones).
Vocabulary tiny_vocab() {
  return Vocabulary::build({{"<blank>", TokenKind::kBlank, std::nullopt},
                            {"<sil>", TokenKind::kSilence, std::nullopt},
                            {"a", TokenKind::kPhonetic, true},
                            {"s", TokenKind::kPhonetic, false}});
}

RecognizerConfig tiny_config() {
  RecognizerConfig cfg;
  cfg.input_dim = 6;
  cfg.adapter_dims = {8, 6};
  cfg.conv_blocks = 1;
  cfg.conv_channels = 6;
  cfg.kernel_width = 3;
  cfg.recurrent_blocks = 1;
  cfg.hidden_size = 6;
  cfg.classifier_dims = {8, 4};
  cfg.logit_noise_std = 0.0;
  return cfg;
}

// Each target token owns a fixed direction in feature space, held for a few frames.
Example make_example(std::mt19937_64& rng, const std::string& id, const std::vector<int>& target) {
  std::normal_distribution<double> noise(0.0, 0.05);
  Example ex;
  ex.id = id;
  ex.target = target;
  std::vector<int> frames;
  for (int tok : target) frames.insert(frames.end(), 3, tok);
  ex.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(frames.size()), 6);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (int j = 0; j < 6; ++j) ex.features(static_cast<Eigen::Index>(t), j) = noise(rng);
    ex.features(static_cast<Eigen::Index>(t), frames[t]) += 2.0;
  }
  return ex;
}

std::vector<Example> make_set(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    std::vector<int> target = {1};
    const int len = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < len; ++k) target.push_back(2 + static_cast<int>(rng() % 2));
    target.push_back(1);
    out.push_back(make_example(rng, "e" + std::to_string(i), target));
  }
  return out;
}

}  // namespace

TEST_CASE("cyclic learning rate") {
  CHECK(cyclic_lr(0, 1e-4, 1e-3, 10) == 1e-4);
  CHECK(cyclic_lr(10, 1e-4, 1e-3, 10) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(cyclic_lr(20, 1e-4, 1e-3, 10) == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK(cyclic_lr(5, 1e-4, 1e-3, 10) == doctest::Approx(5.5e-4).epsilon(1e-14));
  CHECK(cyclic_lr(35, 1e-4, 1e-3, 10) == doctest::Approx(5.5e-4).epsilon(1e-14));
  CHECK_THROWS(cyclic_lr(-1, 1e-4, 1e-3, 10));
  CHECK_THROWS(cyclic_lr(0, 1e-4, 1e-3, 0));
}

TEST_CASE("train config validation and keys") {
  TrainConfig t;
  t.validate();
  t.base_lr = 2e-3;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = TrainConfig{};
  t.batch_size = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);

  TrainConfig u;
  const auto unknown = u.apply_key_values({{"batch_size", "3"}, {"seed", "9"}, {"bogus", "1"}});
  CHECK(unknown == std::vector<std::string>{"bogus"});
  CHECK(u.batch_size == 3);
  CHECK(u.seed == 9);
  TrainConfig w;
  w.apply_key_values(u.to_key_values());
  CHECK(w.to_key_values() == u.to_key_values());
}

TEST_CASE("adam closed forms") {
  ModelParameters p;
  p.names = {"w"};
  p.values = {Eigen::MatrixXd::Constant(1, 1, 0.5)};
  Gradients g = p.zeros_like();

  SUBCASE("zero gradient, no decay") {
    auto state = OptimizerState::zeros_like(p);
    adam_step(p, g, state, 1e-2, 0.0, {});
    CHECK(p.values[0](0, 0) == 0.5);
    CHECK(state.step == 1);
  }
  SUBCASE("constant gradient moves by lr with the sign of g") {
    auto state = OptimizerState::zeros_like(p);
    g.values[0](0, 0) = -3.0;
    double before = p.values[0](0, 0);
    for (int i = 0; i < 2000; ++i) {
      before = p.values[0](0, 0);
      adam_step(p, g, state, 1e-3, 0.0, {});
    }
    CHECK(p.values[0](0, 0) - before == doctest::Approx(1e-3).epsilon(1e-6));
  }
  SUBCASE("decay alone shrinks the parameter") {
    auto state = OptimizerState::zeros_like(p);
    double prev = std::abs(p.values[0](0, 0));
    for (int i = 0; i < 20; ++i) {
      adam_step(p, g, state, 1e-2, 1e-2, {});
      const double now = std::abs(p.values[0](0, 0));
      CHECK(now < prev);
      prev = now;
    }
  }
  SUBCASE("non-finite gradient names the parameter") {
    auto state = OptimizerState::zeros_like(p);
    g.values[0](0, 0) = std::nan("");
    try {
      adam_step(p, g, state, 1e-3, 0.0, {});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("'w'") != std::string::npos);
    }
  }
}

TEST_CASE("padding is inert") {
  const auto cfg = tiny_config();
  RecognizerConfig noisy = cfg;
  noisy.logit_noise_std = 0.1;
  const auto params = init_parameters(cfg, 3);
  const auto set = make_set(4, 3);
  for (const RecognizerConfig* net : {&cfg, static_cast<const RecognizerConfig*>(&noisy)}) {
    const auto batch = pad_batch({&set[0], &set[1], &set[2]});
    const int longest = *std::max_element(batch.lengths.begin(), batch.lengths.end());
    auto scrambled = batch;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 10.0);
    int touched = 0;
    for (std::size_t i = 0; i < scrambled.features.size(); ++i) {
      CHECK(scrambled.features[i].rows() == longest);
      for (Eigen::Index t = scrambled.lengths[i]; t < longest; ++t, ++touched) {
        for (Eigen::Index j = 0; j < 6; ++j) scrambled.features[i](t, j) = n(rng);
      }
    }
    REQUIRE(touched > 0);
    const auto a = batch_loss_and_gradient(params, *net, batch, Mode::kTrain, 5, 7);
    const auto b = batch_loss_and_gradient(params, *net, scrambled, Mode::kTrain, 5, 7);
    CHECK(a.loss == b.loss);
    for (std::size_t k = 0; k < a.grads.size(); ++k) CHECK(a.grads.values[k] == b.grads.values[k]);
    const auto c = batch_loss_and_gradient(params, *net, batch, Mode::kTrain, 5, 7, 3);
    CHECK(a.loss == c.loss);
    for (std::size_t k = 0; k < a.grads.size(); ++k) CHECK(a.grads.values[k] == c.grads.values[k]);
  }
}

TEST_CASE("overfits a single utterance") {
  const auto vocab = tiny_vocab();
  std::mt19937_64 rng(1);
  const std::vector<Example> one = {make_example(rng, "only", {1, 2, 3, 2, 1})};
  TrainConfig t;
  t.batch_size = 1;
  t.epochs = 300;
  t.base_lr = t.max_lr = 1e-2;
  t.patience = -1;
  t.l2 = 0.0;
  const auto result = train(one, one, vocab, tiny_config(), t);
  CHECK(result.log.steps.back().loss < 0.1);
  CHECK(result.best_val_per == 0.0);
}

TEST_CASE("training contracts") {
  const auto vocab = tiny_vocab();
  const auto train_set = make_set(10, 12);
  const auto val_set = make_set(11, 4);
  TrainConfig t;
  t.batch_size = 4;
  t.epochs = 6;
  t.seed = 17;
  t.patience = -1;
  t.half_cycle_steps = 5;

  const auto r1 = train(train_set, val_set, vocab, tiny_config(), t);
  SUBCASE("determinism, also across job counts") {
    auto t2 = t;
    t2.jobs = 3;
    const auto r2 = train(train_set, val_set, vocab, tiny_config(), t);
    const auto r3 = train(train_set, val_set, vocab, tiny_config(), t2);
    for (const auto* other : {&r2, &r3}) {
      REQUIRE(other->log.steps.size() == r1.log.steps.size());
      for (std::size_t i = 0; i < r1.log.steps.size(); ++i) {
        CHECK(other->log.steps[i].loss == r1.log.steps[i].loss);
      }
      for (std::size_t i = 0; i < r1.log.epochs.size(); ++i) {
        CHECK(other->log.epochs[i].val_per == r1.log.epochs[i].val_per);
      }
    }
  }
  SUBCASE("lr trace and selection") {
    REQUIRE(r1.log.steps.size() == 18);
    for (const auto& s : r1.log.steps) {
      CHECK(s.lr == cyclic_lr(s.step, t.base_lr, t.max_lr, 5));
    }
    CHECK(r1.best_val_per <= r1.final_val_per);
    double lowest = INFINITY;
    for (const auto& e : r1.log.epochs) lowest = std::min(lowest, e.val_per);
    CHECK(r1.best_val_per == lowest);
  }
  SUBCASE("patience 0 stops at the first non-improving epoch") {
    auto tp = t;
    tp.patience = 0;
    tp.epochs = 60;
    tp.base_lr = tp.max_lr = 1e-12;
    const auto r = train(train_set, val_set, vocab, tiny_config(), tp);
    CHECK(r.log.epochs.size() == 2);
    CHECK(r.best_epoch == 1);
  }
}

TEST_CASE("infeasible targets are listed") {
  const auto vocab = tiny_vocab();
  auto set = make_set(3, 3);
  set[1].features.conservativeResize(1, Eigen::NoChange);
  auto val = make_set(4, 1);
  val[0].id = "v0";
  val[0].features.conservativeResize(2, Eigen::NoChange);
  TrainConfig t;
  try {
    train(set, val, vocab, tiny_config(), t);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("e1") != std::string::npos);
    CHECK(msg.find("v0") != std::string::npos);
  }
}
