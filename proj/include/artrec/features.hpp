// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "artrec/contours.hpp"
#include "artrec/corpus.hpp"
#include "artrec/vocabulary.hpp"

namespace artrec {

inline constexpr int kArticulatoryChannelSize = kNumArticulators * kPointsPerContour;  // 500
inline constexpr int kArticulatoryDim = 2 * kArticulatoryChannelSize;                 // 1000
inline constexpr int kDefaultMelBands = 80;
inline constexpr int kVoicingDim = 3;

/// Two channels of 500 samples: all x coordinates, then all y coordinates.
/// Within a channel, articulator k occupies [50k, 50k + 50).
struct ArticulatoryFrame {
  std::array<double, kArticulatoryDim> values{};

  double& at(int channel, int position) { return values[static_cast<std::size_t>(channel * kArticulatoryChannelSize + position)]; }
  double at(int channel, int position) const { return values[static_cast<std::size_t>(channel * kArticulatoryChannelSize + position)]; }
  friend bool operator==(const ArticulatoryFrame&, const ArticulatoryFrame&) = default;
};

struct NamedContour {
  std::string name;
  std::vector<Point> points;
};

/// Concatenates named contours in the fixed articulator order. Input order is
/// irrelevant; missing, duplicate or unknown articulators and wrong point
/// counts are rejected. The upper incisor must not be passed.
ArticulatoryFrame assemble_articulatory_frame(const std::vector<NamedContour>& contours);
ArticulatoryFrame assemble_articulatory_frame(const ContourFrame& frame);

/// Inverse of assemble_articulatory_frame (the upper incisor is left unset).
ContourFrame split_articulatory_frame(const ArticulatoryFrame& frame);

/// T x 1000 feature matrix of an utterance.
Eigen::MatrixXd articulatory_features(const UtteranceRecord& utterance);

struct MelConfig {
  int sample_rate = 16000;
  double window_ms = 25.0;
  int hop = 0;  // 0: sample_rate / 50
  int bands = kDefaultMelBands;
  double fmin = 0.0;
  double fmax = 0.0;  // 0: sample_rate / 2
  double log_floor = 1e-10;
};

/// Mel-scale (HTK formula) centre frequencies, in Hz, of the triangular filters.
std::vector<double> mel_center_frequencies(const MelConfig& cfg);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// frames x bands natural-log mel energies over a Hann-windowed magnitude
/// spectrum. Frames are centred at multiples of the hop with zero padding;
/// frame count = floor(samples / hop).
Eigen::MatrixXd mel_spectrogram(std::span<const float> audio, const MelConfig& cfg);

enum class VoicingCategory { kVoiced = 0, kUnvoiced = 1, kNonPhonetic = 2 };

/// T x 3 one-hot voicing encoding from the annotated frame labels.
Eigen::MatrixXd voicing_track(const UtteranceRecord& utterance, const Vocabulary& vocab);
Eigen::MatrixXd voicing_track_from_labels(const std::vector<int>& labels, const Vocabulary& vocab);

/// Per-feature standardization fitted on a training split.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static NormStats fit(const std::vector<const Eigen::MatrixXd*>& features);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;
  int dim() const { return static_cast<int>(mean.size()); }
};

/// `feature_index,mean,std` CSV.
void write_norm_stats(const std::filesystem::path& path, const NormStats& stats);
NormStats read_norm_stats(const std::filesystem::path& path);

enum class FeatureKind { kArticulatory, kAcoustic };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view text);

/// Raw (unnormalized) features for an utterance.
Eigen::MatrixXd utterance_features(const UtteranceRecord& utterance, FeatureKind kind,
                                   int sample_rate);

}  // namespace artrec
