// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "artrec/vocabulary.hpp"

namespace artrec {

/// Row-wise log-softmax of a T x V logit matrix. Throws on non-finite input.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits);

/// log(exp(a) + exp(b)), exact when either side is -inf.
double log_add(double a, double b);

/// Frames needed to emit `target`: its length plus one blank per adjacent
/// repeated pair.
int ctc_min_frames(const std::vector<int>& target);

struct CtcResult {
  double loss = 0.0;     // -log P(target | lp)
  Eigen::MatrixXd grad;  // T x V, d loss / d logits
};

/// Connectionist temporal classification loss over log-probabilities `lp`
/// (rows must be log-softmax outputs). The gradient is taken with respect to
/// the logits that produced `lp`. Throws artrec::Error when the target cannot
/// be emitted in T frames, contains the blank, or is out of range.
CtcResult ctc_loss(const Eigen::MatrixXd& lp, const std::vector<int>& target,
                   int blank = Vocabulary::kBlankIndex);

/// Best-path decoding: per-frame argmax (lowest index wins ties), collapse
/// repeats, drop blanks.
std::vector<int> greedy_decode_indices(const Eigen::MatrixXd& lp,
                                       int blank = Vocabulary::kBlankIndex);
std::vector<std::string> greedy_decode(const Eigen::MatrixXd& lp, const Vocabulary& vocab);

}  // namespace artrec
