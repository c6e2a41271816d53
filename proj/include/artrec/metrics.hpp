// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "artrec/vocabulary.hpp"

namespace artrec {

using SymbolSeq = std::vector<std::string>;

enum class EditOp { kMatch, kSubstitution, kDeletion, kInsertion };

struct AlignmentOp {
  EditOp op = EditOp::kMatch;
  std::string ref;  // empty for insertions
  std::string hyp;  // empty for deletions
};

struct AlignmentResult {
  int distance = 0;
  std::vector<AlignmentOp> ops;  // in sequence order

  int count(EditOp op) const;
};

/// Unit-cost edit distance with a full backtrace. Among equal-cost paths the
/// backtrace (from the end) prefers match, then substitution, deletion,
/// insertion.
AlignmentResult levenshtein_align(const SymbolSeq& ref, const SymbolSeq& hyp);

/// Rebuilds (ref, hyp) from an alignment.
std::pair<SymbolSeq, SymbolSeq> replay_alignment(const AlignmentResult& alignment);

/// Keeps only phonetic tokens of `vocab`; unknown symbols are dropped too.
SymbolSeq phonetic_only(const SymbolSeq& seq, const Vocabulary& vocab);

using RefHypPair = std::pair<SymbolSeq, SymbolSeq>;

/// Phoneme error rate as a percentage: 100 * sum(distance) / sum(|ref|).
/// Throws when the total reference length is zero.
double per(const std::vector<RefHypPair>& pairs);
double per(const std::vector<AlignmentResult>& alignments);

/// Two decimals, e.g. "21.66".
std::string format_per(double per_percent);

/// Aligned two-column text table of labelled PER values.
std::string render_per_table(const std::vector<std::pair<std::string, double>>& rows);

/// Rows: true classes then INSERTION. Columns: predicted classes then
/// DELETION. Matches sit on the diagonal.
struct ConfusionMatrix {
  std::vector<PhoneticClass> classes;
  Eigen::MatrixXd values;           // (classes + 1) x (classes + 1)
  std::vector<long> true_counts;    // reference tokens per class
  long insertions = 0;
  bool normalized = false;

  Eigen::Index insertion_row() const { return static_cast<Eigen::Index>(classes.size()); }
  Eigen::Index deletion_col() const { return static_cast<Eigen::Index>(classes.size()); }
};

/// Counts (or, when `normalize`, per-true-class rates) over the alignments.
/// True-class rows are divided by the class's reference count and the
/// insertion row by the total insertions; empty rows stay zero. Throws for
/// symbols the class map does not know.
ConfusionMatrix confusion_matrix(const std::vector<AlignmentResult>& alignments,
                                 const PhoneticClassMap& class_map, bool normalize);

/// Header "true_class,<classes...>,DELETION"; values with 6 decimals.
std::string confusion_matrix_csv(const ConfusionMatrix& cm);
void write_confusion_matrix_csv(const std::filesystem::path& path, const ConfusionMatrix& cm);

}  // namespace artrec
