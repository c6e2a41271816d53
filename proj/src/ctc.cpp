// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/ctc.hpp"

#include <cmath>
#include <limits>

#include "artrec/error.hpp"

namespace artrec {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  if (!logits.allFinite()) throw Error("log_softmax: non-finite logits");
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
    out.row(t) = logits.row(t).array() - lse;
  }
  return out;
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

int ctc_min_frames(const std::vector<int>& target) {
  int n = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

CtcResult ctc_loss(const Eigen::MatrixXd& lp, const std::vector<int>& target, int blank) {
  const Eigen::Index t_len = lp.rows();
  const Eigen::Index v = lp.cols();
  if (t_len < 1) throw Error("ctc_loss: empty sequence");
  if (blank < 0 || blank >= v) throw Error("ctc_loss: blank index out of range");
  if (!lp.allFinite()) throw Error("ctc_loss: non-finite log-probabilities");
  for (int k : target) {
    if (k < 0 || k >= v) throw Error("ctc_loss: target index " + std::to_string(k) + " out of range");
    if (k == blank) throw Error("ctc_loss: target contains the blank");
  }
  const int need = ctc_min_frames(target);
  if (need > t_len) {
    throw Error("ctc_loss: infeasible target (" + std::to_string(target.size()) +
                " labels need " + std::to_string(need) + " frames, have " +
                std::to_string(t_len) + ")");
  }

  // Extended target: blank, y1, blank, y2, ..., blank.
  const Eigen::Index s_len = 2 * static_cast<Eigen::Index>(target.size()) + 1;
  std::vector<int> ext(static_cast<std::size_t>(s_len), blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  auto can_skip = [&](Eigen::Index s) {  // transition s-2 -> s
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  // alpha includes the emission at t; beta excludes it.
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(t_len, s_len, kNegInf);
  alpha(0, 0) = lp(0, ext[0]);
  if (s_len > 1) alpha(0, 1) = lp(0, ext[1]);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (Eigen::Index s = 0; s < s_len; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = log_add(acc, alpha(t - 1, s - 1));
      if (can_skip(s)) acc = log_add(acc, alpha(t - 1, s - 2));
      if (acc != kNegInf) alpha(t, s) = acc + lp(t, ext[s]);
    }
  }
  double log_p = alpha(t_len - 1, s_len - 1);
  if (s_len > 1) log_p = log_add(log_p, alpha(t_len - 1, s_len - 2));

  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(t_len, s_len, kNegInf);
  beta(t_len - 1, s_len - 1) = 0.0;
  if (s_len > 1) beta(t_len - 1, s_len - 2) = 0.0;
  for (Eigen::Index t = t_len - 1; t-- > 0;) {
    for (Eigen::Index s = 0; s < s_len; ++s) {
      double acc = beta(t + 1, s) == kNegInf ? kNegInf : beta(t + 1, s) + lp(t + 1, ext[s]);
      if (s + 1 < s_len && beta(t + 1, s + 1) != kNegInf) {
        acc = log_add(acc, beta(t + 1, s + 1) + lp(t + 1, ext[s + 1]));
      }
      if (s + 2 < s_len && can_skip(s + 2) && beta(t + 1, s + 2) != kNegInf) {
        acc = log_add(acc, beta(t + 1, s + 2) + lp(t + 1, ext[s + 2]));
      }
      beta(t, s) = acc;
    }
  }

  CtcResult result;
  result.loss = -log_p;
  result.grad = lp.array().exp();
  for (Eigen::Index t = 0; t < t_len; ++t) {
    for (Eigen::Index s = 0; s < s_len; ++s) {
      const double occ = alpha(t, s) + beta(t, s);
      if (occ != kNegInf) result.grad(t, ext[s]) -= std::exp(occ - log_p);
    }
  }
  return result;
}

std::vector<int> greedy_decode_indices(const Eigen::MatrixXd& lp, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (Eigen::Index t = 0; t < lp.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < lp.cols(); ++k)
      if (lp(t, k) > lp(t, best)) best = k;
    const int k = static_cast<int>(best);
    if (k != prev && k != blank) out.push_back(k);
    prev = k;
  }
  return out;
}

std::vector<std::string> greedy_decode(const Eigen::MatrixXd& lp, const Vocabulary& vocab) {
  if (lp.cols() != vocab.size()) throw Error("greedy_decode: width does not match vocabulary");
  std::vector<std::string> out;
  for (int k : greedy_decode_indices(lp, Vocabulary::kBlankIndex)) out.push_back(vocab.symbol(k));
  return out;
}

}  // namespace artrec
