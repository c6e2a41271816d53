// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "artrec/corpus.hpp"
#include "artrec/features.hpp"
#include "artrec/nn.hpp"
#include "artrec/vocabulary.hpp"

namespace artrec {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int batch_size = 16;
  int epochs = 40;
  AdamConfig adam;
  double base_lr = 1e-4;
  double max_lr = 1e-3;
  /// 0 means two epochs' worth of optimizer steps.
  long half_cycle_steps = 0;
  double l2 = 1e-5;
  std::uint64_t seed = 0;
  /// Stop once more than `patience` consecutive epochs fail to improve the
  /// validation PER. Negative disables early stopping.
  int patience = 10;
  /// Worker threads for per-utterance forward/backward and decoding. Results
  /// do not depend on this value.
  int jobs = 1;

  void validate() const;
  std::map<std::string, std::string> to_key_values() const;
  /// Applies recognized keys from `kv`; returns the keys it did not know.
  std::vector<std::string> apply_key_values(const std::map<std::string, std::string>& kv);
};

/// Triangular cyclic schedule: base -> max over `half_cycle` steps, then back.
double cyclic_lr(long step, double base_lr, double max_lr, long half_cycle);

struct OptimizerState {
  ModelParameters m;
  ModelParameters v;
  long step = 0;

  static OptimizerState zeros_like(const ModelParameters& params);
};

/// One bias-corrected Adam update on grads + l2 * params. Throws, naming the
/// parameter, on a non-finite gradient.
void adam_step(ModelParameters& params, const Gradients& grads, OptimizerState& state, double lr,
               double l2, const AdamConfig& adam);

/// One utterance, ready for the network.
struct Example {
  std::string id;
  Eigen::MatrixXd features;  // T x input_dim, normalized
  Eigen::MatrixXd voicing;   // T x 3, empty when unused
  std::vector<int> target;   // token indices
};

/// Normalized features (plus voicing when requested) for `ids`.
std::vector<Example> prepare_examples(const Corpus& corpus, const std::vector<std::string>& ids,
                                      const Vocabulary& vocab, FeatureKind kind,
                                      const NormStats& norm, bool use_voicing);

/// Fits per-feature normalization on the listed utterances.
NormStats fit_norm_stats(const Corpus& corpus, const std::vector<std::string>& ids,
                         FeatureKind kind);

/// Sequences padded to the longest member by repeating their final frame,
/// with the true lengths alongside.
struct PaddedBatch {
  std::vector<Eigen::MatrixXd> features;
  std::vector<Eigen::MatrixXd> voicing;
  std::vector<int> lengths;
  std::vector<std::vector<int>> targets;
};

PaddedBatch pad_batch(const std::vector<const Example*>& members);

struct BatchResult {
  double loss = 0.0;  // mean CTC loss over the batch
  Gradients grads;    // of the mean loss
};

/// Forward/backward over a padded batch. Each sequence is run at its true
/// length, so padding never reaches the loss. `noise_seed` and `step` seed
/// the per-sequence logit noise in train mode.
BatchResult batch_loss_and_gradient(const ModelParameters& params, const RecognizerConfig& cfg,
                                    const PaddedBatch& batch, Mode mode, std::uint64_t noise_seed,
                                    long step, int jobs = 1);

/// Greedy decodes of `examples` in eval mode, in input order.
std::vector<std::vector<int>> decode_examples(const ModelParameters& params,
                                              const RecognizerConfig& cfg,
                                              const std::vector<Example>& examples, int jobs = 1);

/// PER (percent) of greedy decodes against example targets.
double evaluate_per(const ModelParameters& params, const RecognizerConfig& cfg,
                    const std::vector<Example>& examples, const Vocabulary& vocab, int jobs = 1);

struct StepRecord {
  long step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double val_per = 0.0;
};

struct TrainingLog {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  ModelParameters best_params;
  int best_epoch = 0;
  double best_val_per = 0.0;
  ModelParameters final_params;
  double final_val_per = 0.0;
  TrainingLog log;
};

/// Mini-batch training with validation-PER model selection. Deterministic
/// for a fixed config and seed. Throws on infeasible targets (listing every
/// offending id) and on divergence.
TrainResult train(const std::vector<Example>& train_set, const std::vector<Example>& validation_set,
                  const Vocabulary& vocab, const RecognizerConfig& cfg, const TrainConfig& tcfg);

/// `step,lr,loss` and `epoch,val_per` CSV files.
void write_step_log(const std::filesystem::path& path, const TrainingLog& log);
void write_epoch_log(const std::filesystem::path& path, const TrainingLog& log);

}  // namespace artrec
