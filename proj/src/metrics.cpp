// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "artrec/error.hpp"
#include "artrec/text_io.hpp"

namespace artrec {

int AlignmentResult::count(EditOp op) const {
  return static_cast<int>(
      std::count_if(ops.begin(), ops.end(), [op](const AlignmentOp& o) { return o.op == op; }));
}

AlignmentResult levenshtein_align(const SymbolSeq& ref, const SymbolSeq& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  AlignmentResult result;
  result.distance = at(n, m);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const int cur = at(i, j);
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && cur == at(i - 1, j - 1)) {
      result.ops.push_back({EditOp::kMatch, ref[i - 1], hyp[j - 1]});
      --i;
      --j;
    } else if (i > 0 && j > 0 && ref[i - 1] != hyp[j - 1] && cur == at(i - 1, j - 1) + 1) {
      result.ops.push_back({EditOp::kSubstitution, ref[i - 1], hyp[j - 1]});
      --i;
      --j;
    } else if (i > 0 && cur == at(i - 1, j) + 1) {
      result.ops.push_back({EditOp::kDeletion, ref[i - 1], {}});
      --i;
    } else {
      result.ops.push_back({EditOp::kInsertion, {}, hyp[j - 1]});
      --j;
    }
  }
  std::reverse(result.ops.begin(), result.ops.end());
  return result;
}

std::pair<SymbolSeq, SymbolSeq> replay_alignment(const AlignmentResult& alignment) {
  std::pair<SymbolSeq, SymbolSeq> out;
  for (const auto& op : alignment.ops) {
    if (op.op != EditOp::kInsertion) out.first.push_back(op.ref);
    if (op.op != EditOp::kDeletion) out.second.push_back(op.hyp);
  }
  return out;
}

SymbolSeq phonetic_only(const SymbolSeq& seq, const Vocabulary& vocab) {
  SymbolSeq out;
  for (const auto& s : seq)
    if (vocab.contains(s) && vocab.is_phonetic(vocab.index_of(s))) out.push_back(s);
  return out;
}

double per(const std::vector<RefHypPair>& pairs) {
  std::vector<AlignmentResult> alignments;
  alignments.reserve(pairs.size());
  long ref_total = 0;
  for (const auto& [ref, hyp] : pairs) {
    alignments.push_back(levenshtein_align(ref, hyp));
    ref_total += static_cast<long>(ref.size());
  }
  if (ref_total == 0) throw Error("per: total reference length is zero");
  return per(alignments);
}

double per(const std::vector<AlignmentResult>& alignments) {
  long errors = 0;
  long ref_total = 0;
  for (const auto& a : alignments) {
    errors += a.distance;
    ref_total += static_cast<long>(a.ops.size()) - a.count(EditOp::kInsertion);
  }
  if (ref_total == 0) throw Error("per: total reference length is zero");
  return 100.0 * static_cast<double>(errors) / static_cast<double>(ref_total);
}

std::string format_per(double per_percent) { return fmt::format("{:.2f}", per_percent); }

std::string render_per_table(const std::vector<std::pair<std::string, double>>& rows) {
  std::size_t width = 5;  // "Input"
  for (const auto& [label, value] : rows) width = std::max(width, label.size());
  std::string out = fmt::format("{:<{}}  {:>6}\n", "Input", width, "PER");
  for (const auto& [label, value] : rows) {
    out += fmt::format("{:<{}}  {:>6}\n", label, width, format_per(value));
  }
  return out;
}

ConfusionMatrix confusion_matrix(const std::vector<AlignmentResult>& alignments,
                                 const PhoneticClassMap& class_map, bool normalize) {
  ConfusionMatrix cm;
  cm.classes.assign(kAllPhoneticClasses.begin(), kAllPhoneticClasses.end());
  const Eigen::Index k = static_cast<Eigen::Index>(cm.classes.size());
  cm.values = Eigen::MatrixXd::Zero(k + 1, k + 1);
  cm.true_counts.assign(cm.classes.size(), 0);
  auto idx = [&](const std::string& symbol) {
    return static_cast<Eigen::Index>(class_map.class_of(symbol));
  };
  for (const auto& a : alignments) {
    for (const auto& op : a.ops) {
      switch (op.op) {
        case EditOp::kMatch:
        case EditOp::kSubstitution: {
          const auto r = idx(op.ref);
          cm.values(r, idx(op.hyp)) += 1.0;
          ++cm.true_counts[static_cast<std::size_t>(r)];
          break;
        }
        case EditOp::kDeletion: {
          const auto r = idx(op.ref);
          cm.values(r, cm.deletion_col()) += 1.0;
          ++cm.true_counts[static_cast<std::size_t>(r)];
          break;
        }
        case EditOp::kInsertion:
          cm.values(cm.insertion_row(), idx(op.hyp)) += 1.0;
          ++cm.insertions;
          break;
      }
    }
  }
  if (normalize) {
    for (Eigen::Index r = 0; r < k; ++r) {
      const long n = cm.true_counts[static_cast<std::size_t>(r)];
      if (n > 0) cm.values.row(r) /= static_cast<double>(n);
    }
    if (cm.insertions > 0) cm.values.row(k) /= static_cast<double>(cm.insertions);
    cm.normalized = true;
  }
  return cm;
}

std::string confusion_matrix_csv(const ConfusionMatrix& cm) {
  std::string out = "true_class";
  for (auto c : cm.classes) out += "," + std::string(to_string(c));
  out += ",DELETION\n";
  for (Eigen::Index r = 0; r < cm.values.rows(); ++r) {
    out += r == cm.insertion_row() ? std::string("INSERTION")
                                   : std::string(to_string(cm.classes[static_cast<std::size_t>(r)]));
    for (Eigen::Index c = 0; c < cm.values.cols(); ++c) out += fmt::format(",{:.6f}", cm.values(r, c));
    out += "\n";
  }
  return out;
}

void write_confusion_matrix_csv(const std::filesystem::path& path, const ConfusionMatrix& cm) {
  write_text_file(path, confusion_matrix_csv(cm));
}

}  // namespace artrec
