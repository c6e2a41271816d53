// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "artrec/contours.hpp"
#include "artrec/vocabulary.hpp"

namespace artrec {

struct PhoneSegment {
  std::string symbol;
  int token = 0;  // index into the vocabulary the corpus was loaded with
  double start = 0.0;
  double end = 0.0;
};

struct UtteranceRecord {
  std::string id;
  std::vector<ContourFrame> frames;
  std::optional<std::vector<PhoneSegment>> annotation;
  double frame_rate = 50.0;
  std::vector<float> audio;  // mono samples at the corpus sample rate; may be empty

  int num_frames() const { return static_cast<int>(frames.size()); }
  double duration() const { return frames.size() / frame_rate; }
};

enum class SplitName { kTrain, kValidation, kTest };

std::string_view to_string(SplitName split);
SplitName split_from_string(std::string_view text);

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  const std::vector<std::string>& ids(SplitName split) const;
};

/// In-memory corpus. Read-only after construction; safe for concurrent readers.
class Corpus {
 public:
  Corpus() = default;
  Corpus(double frame_rate, int sample_rate, std::vector<UtteranceRecord> utterances,
         CorpusSplit split);

  double frame_rate() const { return frame_rate_; }
  int sample_rate() const { return sample_rate_; }
  const std::vector<std::string>& ids() const { return ids_; }
  bool contains(std::string_view id) const;
  const UtteranceRecord& utterance(std::string_view id) const;
  const CorpusSplit& split() const { return split_; }
  const std::vector<std::string>& split_ids(SplitName split) const { return split_.ids(split); }

 private:
  double frame_rate_ = 50.0;
  int sample_rate_ = 0;
  std::vector<std::string> ids_;
  std::map<std::string, UtteranceRecord, std::less<>> utterances_;
  CorpusSplit split_;
};

/// Reads `root` (meta.txt, utterances/<id>/..., splits/*.txt). Throws
/// artrec::Error on the first problem, naming the utterance and location.
Corpus load_corpus(const std::filesystem::path& root, const Vocabulary& vocab);

/// Like load_corpus, but collects every problem instead of stopping.
std::vector<std::string> validate_corpus(const std::filesystem::path& root,
                                         const Vocabulary& vocab);

/// Optional facts recorded in meta.txt.
struct CorpusProvenance {
  std::optional<std::uint64_t> generator_seed;
  std::string source;  // single line, e.g. "mean-contour"
};

void write_corpus(const Corpus& corpus, const std::filesystem::path& root,
                  const CorpusProvenance& provenance = {});

/// Per-frame token index by the frame-midpoint rule: frame t takes the
/// segment containing (t + 0.5) / frame_rate, and silence outside segments.
std::vector<int> frame_labels(const UtteranceRecord& utterance, const Vocabulary& vocab);

/// Segment index per frame by the same rule, -1 outside every segment.
std::vector<int> frame_segments(const std::vector<PhoneSegment>& annotation, int num_frames,
                                double frame_rate);

/// Same rule for a bare annotation and an explicit frame count.
std::vector<int> frame_labels(const std::vector<PhoneSegment>& annotation, int num_frames,
                              double frame_rate, const Vocabulary& vocab);

/// Token indices of the annotated segments, in time order.
std::vector<int> target_sequence(const UtteranceRecord& utterance);

/// Checks an annotation against the vocabulary and the frame count.
/// Returns an empty string when valid.
std::string check_annotation(const std::vector<PhoneSegment>& annotation, int num_frames,
                             double frame_rate, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Synthetic corpus generator.

struct GeneratorConfig {
  std::vector<std::string> tokens;  // phonetic symbols to draw from
  /// symbol -> symbol whose prototype it copies (e.g. voiced/unvoiced pairs).
  std::map<std::string, std::string> shared_prototypes;
  /// Explicit prototypes; symbols missing here get seeded random ones.
  std::map<std::string, ContourFrame> prototypes;
  double prototype_scale = 1.0;

  int num_train = 20;
  int num_validation = 4;
  int num_test = 4;
  int min_tokens = 3;
  int max_tokens = 6;
  int min_duration = 4;  // frames per segment
  int max_duration = 8;
  int edge_silence_min = 0;  // frames of leading/trailing silence; 0 disables
  int edge_silence_max = 0;
  bool allow_repeats = false;
  int ramp_frames = 3;
  double noise_std = 0.0;
  double frame_rate = 50.0;
  int sample_rate = 0;  // > 0 adds a synthetic audio track
  double audio_noise_std = 0.01;
};

/// Parses the flat key=value generator config format.
GeneratorConfig parse_generator_config(const std::map<std::string, std::string>& kv);

/// Prototype contours (and tone frequencies for audio) for every symbol the
/// generator can emit, silence included when edge silence is enabled.
struct PrototypeSet {
  std::map<std::string, ContourFrame> contours;
  std::map<std::string, std::vector<double>> tones;
};

PrototypeSet make_prototypes(const GeneratorConfig& cfg, const Vocabulary& vocab,
                             std::uint64_t seed);

/// RMS deviation of prototype coordinates from their across-token mean.
double prototype_spread(const PrototypeSet& prototypes);

/// Deterministic in (cfg, seed).
Corpus generate_synthetic_corpus(const GeneratorConfig& cfg, const Vocabulary& vocab,
                                 std::uint64_t seed);

}  // namespace artrec
