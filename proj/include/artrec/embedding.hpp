// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "artrec/corpus.hpp"
#include "artrec/features.hpp"
#include "artrec/nn.hpp"
#include "artrec/vocabulary.hpp"

namespace artrec {

/// Classifier-block input (T x penultimate_dim) from an eval-mode forward.
Eigen::MatrixXd extract_penultimate(const ModelParameters& params, const RecognizerConfig& cfg,
                                    const Eigen::MatrixXd& features, const Eigen::MatrixXd* voicing);

/// Points labelled with one of the seven named phonetic classes.
struct LabeledFeatureSet {
  Eigen::MatrixXd points;  // N x D
  std::vector<PhoneticClass> labels;
  std::vector<std::string> point_ids;  // "<utt>:f<frame>" or "<utt>:s<segment>"

  std::size_t size() const { return labels.size(); }
};

/// What collect_labeled_features needs to run the recognizer.
struct RecognizerView {
  const ModelParameters* params = nullptr;
  const RecognizerConfig* cfg = nullptr;
  const NormStats* norm = nullptr;
  FeatureKind kind = FeatureKind::kArticulatory;
};

/// Frames are labelled by the midpoint rule; frames whose token is
/// non-phonetic or in Others are dropped. With pooling, frames of one
/// annotated segment are averaged into a single point.
LabeledFeatureSet collect_labeled_features(const Corpus& corpus, const std::vector<std::string>& ids,
                                           const Vocabulary& vocab,
                                           const PhoneticClassMap& class_map,
                                           const RecognizerView& model, bool per_segment_pooling,
                                           int jobs = 1);

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless 1 < perplexity < n / 3 and the iteration
  /// counts are consistent.
  void validate(std::size_t n) const;
};

struct TsneAffinities {
  Eigen::MatrixXd p;  // symmetric, sums to 1, zero diagonal
  bool degenerate = false;  // every pair of points coincides
};

/// Joint input affinities: per-point Gaussian bandwidths found by bisection
/// to match `perplexity` (entropy tolerance 1e-5), then symmetrized.
TsneAffinities tsne_affinities(const Eigen::MatrixXd& points, double perplexity);

struct TsneResult {
  Eigen::MatrixXd embedding;  // N x 2, centered
  double kl_after_exaggeration = 0.0;
  double kl_final = 0.0;
  bool degenerate = false;
};

/// Exact t-SNE with momentum, gains and early exaggeration. Deterministic per
/// seed. Identical inputs yield a small seeded noise layout, flagged.
TsneResult tsne(const Eigen::MatrixXd& points, const TsneConfig& cfg);

/// KL(P || Q) for a 2-D layout.
double tsne_kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& embedding);

/// `point_id,class,x,y`.
void write_embedding_csv(const std::filesystem::path& path, const LabeledFeatureSet& set,
                         const Eigen::MatrixXd& embedding);
/// Scatter plot with one color per class and a legend.
void write_embedding_svg(const std::filesystem::path& path, const LabeledFeatureSet& set,
                         const Eigen::MatrixXd& embedding);

}  // namespace artrec
