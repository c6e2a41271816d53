// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "artrec/ctc.hpp"
#include "artrec/error.hpp"
#include "support/oracles.hpp"

using namespace artrec;

namespace {

Eigen::MatrixXd random_logits(std::mt19937_64& rng, int t, int v, double scale = 2.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::MatrixXd m(t, v);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < v; ++j) m(i, j) = dist(rng);
  return m;
}

std::vector<int> random_target(std::mt19937_64& rng, int max_len, int v, int t) {
  std::uniform_int_distribution<int> len_dist(0, max_len);
  std::uniform_int_distribution<int> sym(1, v - 1);
  while (true) {
    std::vector<int> target(static_cast<std::size_t>(len_dist(rng)));
    for (auto& k : target) k = sym(rng);
    if (ctc_min_frames(target) <= t) return target;
  }
}

}  // namespace

TEST_CASE("log_softmax rows normalize and are shift invariant") {
  Eigen::MatrixXd uniform = Eigen::MatrixXd::Zero(1, 2);
  const auto lp = log_softmax(uniform);
  CHECK(lp(0, 0) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(lp(0, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-15));

  std::mt19937_64 rng(1);
  Eigen::MatrixXd x = random_logits(rng, 4, 5);
  const auto a = log_softmax(x);
  const auto b = log_softmax((x.array() + 123.0).matrix());
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index t = 0; t < a.rows(); ++t) CHECK(std::abs(a.row(t).array().exp().sum() - 1.0) < 1e-12);

  Eigen::MatrixXd big(1, 2);
  big << 1000.0, 0.0;
  const auto s = log_softmax(big);
  CHECK(s(0, 0) == doctest::Approx(0.0));
  CHECK(s(0, 1) == doctest::Approx(-1000.0));
  CHECK(s.allFinite());

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(1, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(log_softmax(bad), Error);
}

TEST_CASE("ctc loss small closed forms") {
  SUBCASE("single frame") {
    const auto lp = log_softmax(Eigen::MatrixXd::Zero(1, 2));
    CHECK(ctc_loss(lp, {1}).loss == doctest::Approx(-std::log(0.5)).epsilon(1e-14));
  }
  SUBCASE("two frames, paths aa a- -a") {
    const auto lp = log_softmax(Eigen::MatrixXd::Zero(2, 2));
    CHECK(ctc_loss(lp, {1}).loss == doctest::Approx(-std::log(0.75)).epsilon(1e-14));
  }
  SUBCASE("empty target is the all-blank path") {
    std::mt19937_64 rng(2);
    const auto lp = log_softmax(random_logits(rng, 4, 3));
    CHECK(ctc_loss(lp, {}).loss == doctest::Approx(-lp.col(0).sum()).epsilon(1e-13));
  }
}

TEST_CASE("ctc loss matches path enumeration") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int t = 1 + static_cast<int>(rng() % 5);
    const int v = 2 + static_cast<int>(rng() % 3);
    const auto lp = log_softmax(random_logits(rng, t, v));
    const auto target = random_target(rng, 3, v, t);
    const double brute = oracle::ctc_path_sum(lp, target, 0);
    CHECK(std::abs(std::exp(-ctc_loss(lp, target).loss) - brute) < 1e-9);
  }
}

TEST_CASE("ctc gradient matches central differences") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int t = 2 + static_cast<int>(rng() % 3);
    const int v = 2 + static_cast<int>(rng() % 3);
    Eigen::MatrixXd logits = random_logits(rng, t, v, 1.0);
    const auto target = random_target(rng, 2, v, t);
    const auto analytic = ctc_loss(log_softmax(logits), target).grad;
    const auto numeric = oracle::central_difference(
        [&] { return ctc_loss(log_softmax(logits), target).loss; }, &logits);
    CHECK(oracle::max_relative_error(analytic, numeric) < 1e-6);
  }
}

TEST_CASE("ctc properties") {
  std::mt19937_64 rng(5);
  const auto lp = log_softmax(random_logits(rng, 4, 3));
  const std::vector<int> target{1, 2};
  const double base = ctc_loss(lp, target).loss;
  CHECK(base >= 0.0);

  // A trailing frame that is certainly blank changes nothing.
  Eigen::MatrixXd extended(5, 3);
  extended.topRows(4) = lp;
  extended.row(4) << 0.0, -std::numeric_limits<double>::infinity(),
      -std::numeric_limits<double>::infinity();
  // ctc_loss rejects non-finite input, so use a very confident blank instead.
  extended.row(4) << 0.0, -800.0, -800.0;
  CHECK(ctc_loss(extended, target).loss == doctest::Approx(base).epsilon(1e-12));

  // Gradient rows sum to zero (softmax minus a distribution).
  const auto g = ctc_loss(lp, target).grad;
  for (Eigen::Index t = 0; t < g.rows(); ++t) CHECK(std::abs(g.row(t).sum()) < 1e-12);
}

TEST_CASE("ctc rejects bad targets") {
  const auto lp = log_softmax(Eigen::MatrixXd::Zero(2, 3));
  CHECK_THROWS_AS(ctc_loss(lp, {1, 1}), Error);  // needs 3 frames
  CHECK_THROWS_AS(ctc_loss(lp, {1, 2, 1}), Error);
  CHECK_THROWS_AS(ctc_loss(lp, {0}), Error);
  CHECK_THROWS_AS(ctc_loss(lp, {3}), Error);
  CHECK_NOTHROW(ctc_loss(lp, {1, 2}));
  CHECK(ctc_min_frames({1, 1, 2, 2}) == 6);
  try {
    ctc_loss(lp, {1, 1});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("infeasible") != std::string::npos);
  }
}

TEST_CASE("greedy decoding collapses repeats and drops blanks") {
  Vocabulary vocab = Vocabulary::build({{"<blank>", TokenKind::kBlank, std::nullopt},
                                        {"a", TokenKind::kPhonetic, true},
                                        {"b", TokenKind::kPhonetic, true}});
  auto path = [](std::vector<int> ks) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(ks.size()), 3, -5.0);
    for (std::size_t t = 0; t < ks.size(); ++t) m(static_cast<Eigen::Index>(t), ks[t]) = 0.0;
    return m;
  };
  CHECK(greedy_decode(path({1, 1, 0, 2}), vocab) == std::vector<std::string>{"a", "b"});
  CHECK(greedy_decode(path({0, 0, 0}), vocab).empty());
  CHECK(greedy_decode(path({1, 0, 1}), vocab) == std::vector<std::string>{"a", "a"});
  // Ties go to the lowest index.
  CHECK(greedy_decode_indices(Eigen::MatrixXd::Zero(2, 3)).empty());
  Eigen::MatrixXd tie = Eigen::MatrixXd::Zero(1, 3);
  tie(0, 0) = -1.0;
  CHECK(greedy_decode_indices(tie) == std::vector<int>{1});

  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto out = greedy_decode_indices(random_logits(rng, 8, 3));
    CHECK(std::find(out.begin(), out.end(), 0) == out.end());
  }
}
