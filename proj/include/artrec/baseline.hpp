// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "artrec/corpus.hpp"
#include "artrec/features.hpp"

namespace artrec {

/// Phoneme-wise mean-contour synthesizer: one average articulatory frame per
/// token, emitted piecewise-constant over the annotated segments.
class MeanContourModel {
 public:
  struct Entry {
    ArticulatoryFrame mean;
    long support = 0;  // frames averaged
  };

  /// Averages every training frame by its midpoint-rule label.
  static MeanContourModel fit(const Corpus& corpus, const std::vector<std::string>& train_ids,
                              const Vocabulary& vocab);

  const std::map<std::string, Entry>& entries() const { return entries_; }
  const std::optional<Entry>& global_mean() const { return global_; }
  bool has(const std::string& symbol) const { return entries_.count(symbol) != 0; }

  /// One frame per 1/frame_rate over the annotation span. Unseen tokens fall
  /// back to the global mean with a warning; without one they are an error.
  std::vector<ArticulatoryFrame> synthesize(const std::vector<PhoneSegment>& annotation,
                                            double frame_rate, const Vocabulary& vocab) const;

  /// Synthetic copy of `ids` from `source`: contours replaced, annotations kept.
  /// Only the listed ids appear, all in the test split.
  Corpus synthesize_corpus(const Corpus& source, const std::vector<std::string>& ids,
                           const Vocabulary& vocab) const;

  /// `symbol,channel,position,value,support_count` CSV; the global mean uses
  /// the symbol `__global__`.
  void save(const std::filesystem::path& path) const;
  static MeanContourModel load(const std::filesystem::path& path);

 private:
  std::map<std::string, Entry> entries_;
  std::optional<Entry> global_;
};

/// Number of output frames for an annotation: ceil(duration * frame_rate).
int synthesized_frame_count(const std::vector<PhoneSegment>& annotation, double frame_rate);

}  // namespace artrec
