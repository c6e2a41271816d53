// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "artrec/embedding.hpp"
#include "artrec/error.hpp"
#include "artrec/text_io.hpp"

using namespace artrec;

namespace {

RecognizerConfig probe_config() {
  RecognizerConfig cfg;
  cfg.input_dim = kArticulatoryDim;
  cfg.adapter_dims = {4};
  cfg.conv_blocks = 1;
  cfg.conv_channels = 4;
  cfg.recurrent_blocks = 1;
  cfg.hidden_size = 3;
  cfg.classifier_dims = {5, 50};
  return cfg;
}

NormStats identity_norm() {
  NormStats n;
  n.mean = Eigen::VectorXd::Zero(kArticulatoryDim);
  n.std = Eigen::VectorXd::Ones(kArticulatoryDim);
  return n;
}

Eigen::MatrixXd two_clusters(std::mt19937_64& rng, int per_cluster, int dim, double gap) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd x(2 * per_cluster, dim);
  for (int i = 0; i < 2 * per_cluster; ++i) {
    for (int j = 0; j < dim; ++j) x(i, j) = n(rng) + (i < per_cluster ? 0.0 : gap);
  }
  return x;
}

}  // namespace

TEST_CASE("penultimate features") {
  const auto cfg = probe_config();
  const auto params = init_parameters(cfg, 2);
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(9, kArticulatoryDim);
  const auto a = extract_penultimate(params, cfg, x, nullptr);
  CHECK(a.rows() == 9);
  CHECK(a.cols() == cfg.recurrent_output_dim());
  CHECK(extract_penultimate(params, cfg, x, nullptr) == a);

  auto zero = params.zeros_like();
  const auto z = extract_penultimate(zero, cfg, x, nullptr);
  for (Eigen::Index t = 1; t < z.rows(); ++t) CHECK(z.row(t) == z.row(0));

  CHECK_THROWS_AS(extract_penultimate(params, cfg, Eigen::MatrixXd::Zero(4, 80), nullptr), Error);
}

TEST_CASE("labelled feature collection") {
  const Vocabulary v = default_vocabulary();
  const auto classes = default_class_map(v);
  const int a = v.index_of("a");
  const int sil = *v.silence_index();
  UtteranceRecord u;
  u.id = "u";
  u.frames.resize(14);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (auto& f : u.frames) {
    for (auto& c : f.articulators) {
      for (auto& p : c) p = {n(rng), n(rng)};
    }
  }
  u.annotation = std::vector<PhoneSegment>{{"<sil>", sil, 0.0, 0.04}, {"a", a, 0.04, 0.24},
                                           {"<sil>", sil, 0.24, 0.28}};
  UtteranceRecord quiet;
  quiet.id = "quiet";
  quiet.frames.resize(5);
  quiet.annotation = std::vector<PhoneSegment>{{"<sil>", sil, 0.0, 0.1}};
  const Corpus corpus(50.0, 0, {u, quiet}, CorpusSplit{{"u", "quiet"}, {}, {}});

  const auto cfg = probe_config();
  const auto params = init_parameters(cfg, 1);
  const auto norm = identity_norm();
  const RecognizerView view{&params, &cfg, &norm, FeatureKind::kArticulatory};

  CHECK(collect_labeled_features(corpus, {"quiet"}, v, classes, view, true).size() == 0);

  const auto pooled = collect_labeled_features(corpus, {"u"}, v, classes, view, true);
  REQUIRE(pooled.size() == 1);
  CHECK(pooled.labels[0] == PhoneticClass::kOpenVowels);
  CHECK(pooled.point_ids[0] == "u:s1");

  const auto frames = collect_labeled_features(corpus, {"u", "quiet"}, v, classes, view, false, 2);
  REQUIRE(frames.size() == 10);
  for (auto label : frames.labels) CHECK(label == PhoneticClass::kOpenVowels);
  CHECK(frames.point_ids.front() == "u:f2");
  const Eigen::RowVectorXd mean = frames.points.colwise().mean();
  CHECK((pooled.points.row(0) - mean).norm() < 1e-12);
}

TEST_CASE("t-SNE configuration") {
  TsneConfig cfg;
  CHECK_THROWS_AS(cfg.validate(30), ConfigError);  // perplexity 30 needs N > 90
  cfg.validate(91);
  cfg.perplexity = 1.0;
  CHECK_THROWS_AS(cfg.validate(100), ConfigError);
  cfg = TsneConfig{};
  cfg.perplexity = 2.0;
  CHECK_THROWS_AS(cfg.validate(3), ConfigError);
  cfg.iterations = 100;
  CHECK_THROWS_AS(cfg.validate(100), ConfigError);
}

TEST_CASE("t-SNE affinities") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd x = two_clusters(rng, 12, 5, 6.0);
  const auto aff = tsne_affinities(x, 5.0);
  CHECK_FALSE(aff.degenerate);
  CHECK(aff.p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((aff.p - aff.p.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(aff.p.diagonal().cwiseAbs().maxCoeff() == 0.0);

  // Half turns in two coordinate planes are exact in floating point.
  Eigen::MatrixXd turned = x;
  turned.col(0) = -x.col(0);
  turned.col(1) = -x.col(1);
  turned.col(3) = -x.col(3);
  turned.col(4) = -x.col(4);
  CHECK(tsne_affinities(turned, 5.0).p == aff.p);

  // A general rotation agrees to rounding.
  Eigen::MatrixXd g = Eigen::MatrixXd::Random(5, 5);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  const auto rotated = tsne_affinities(x * q, 5.0);
  CHECK((rotated.p - aff.p).cwiseAbs().maxCoeff() < 1e-12);

  // Each conditional row reaches the requested perplexity.
  const Eigen::MatrixXd dup = Eigen::MatrixXd::Zero(6, 3);
  CHECK(tsne_affinities(dup, 1.5).degenerate);
}

TEST_CASE("t-SNE layout") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd x = two_clusters(rng, 10, 5, 10.0);
  TsneConfig cfg;
  cfg.perplexity = 5.0;
  cfg.seed = 3;
  const auto r = tsne(x, cfg);
  REQUIRE(r.embedding.rows() == 20);
  REQUIRE(r.embedding.cols() == 2);
  CHECK(r.embedding.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
  CHECK(r.kl_final <= r.kl_after_exaggeration);
  CHECK(r.kl_final == doctest::Approx(tsne_kl(tsne_affinities(x, 5.0).p, r.embedding)));

  int pure = 0;
  for (int i = 0; i < 20; ++i) {
    int best = -1;
    double best_d = INFINITY;
    for (int j = 0; j < 20; ++j) {
      if (j == i) continue;
      const double d = (r.embedding.row(i) - r.embedding.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    pure += (i < 10) == (best < 10);
  }
  CHECK(pure / 20.0 >= 0.9);

  const auto again = tsne(x, cfg);
  CHECK(again.embedding == r.embedding);

  const auto degenerate = tsne(Eigen::MatrixXd::Zero(20, 5), cfg);
  CHECK(degenerate.degenerate);
  CHECK(degenerate.embedding.allFinite());
  CHECK(degenerate.embedding.cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("embedding exports") {
  LabeledFeatureSet set;
  set.points = Eigen::MatrixXd::Zero(2, 3);
  set.labels = {PhoneticClass::kDental, PhoneticClass::kFrontVowels};
  set.point_ids = {"u:s1", "u:s2"};
  Eigen::MatrixXd y(2, 2);
  y << 0.5, -1.0, 2.0, 0.25;
  const auto dir = std::filesystem::temp_directory_path() / "artrec_test_embed";
  std::filesystem::create_directories(dir);
  write_embedding_csv(dir / "e.csv", set, y);
  const auto lines = read_lines(dir / "e.csv");
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0] == "point_id,class,x,y");
  CHECK(lines[1] == "u:s1,Dental,0.5,-1");
  write_embedding_svg(dir / "e.svg", set, y);
  const auto svg = read_lines(dir / "e.svg");
  std::string all;
  for (const auto& l : svg) all += l;
  CHECK(all.find("<svg") != std::string::npos);
  CHECK(all.find("Front Vowels") != std::string::npos);
  std::filesystem::remove_all(dir);
}
