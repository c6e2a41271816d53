// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/features.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "artrec/error.hpp"
#include "artrec/text_io.hpp"

namespace artrec {

ArticulatoryFrame assemble_articulatory_frame(const std::vector<NamedContour>& contours) {
  std::array<const NamedContour*, kNumArticulators> slots{};
  for (const auto& c : contours) {
    if (c.name == kUpperIncisor) {
      throw Error("the upper incisor is the coordinate reference and not a feature");
    }
    const auto index = articulator_index(c.name);
    if (!index) throw Error("unknown articulator '" + c.name + "'");
    auto& slot = slots[static_cast<std::size_t>(*index)];
    if (slot) throw Error("articulator '" + c.name + "' given twice");
    if (static_cast<int>(c.points.size()) != kPointsPerContour) {
      throw Error("articulator '" + c.name + "' has " + std::to_string(c.points.size()) +
                  " points (expected " + std::to_string(kPointsPerContour) + ")");
    }
    slot = &c;
  }
  ContourFrame frame;
  for (std::size_t a = 0; a < kNumArticulators; ++a) {
    if (!slots[a]) throw Error("missing articulator '" + std::string(kArticulatorNames[a]) + "'");
    std::copy(slots[a]->points.begin(), slots[a]->points.end(), frame.articulators[a].begin());
  }
  return assemble_articulatory_frame(frame);
}

ArticulatoryFrame assemble_articulatory_frame(const ContourFrame& frame) {
  ArticulatoryFrame out;
  for (int a = 0; a < kNumArticulators; ++a) {
    const auto& contour = frame.articulators[static_cast<std::size_t>(a)];
    for (int p = 0; p < kPointsPerContour; ++p) {
      out.at(0, a * kPointsPerContour + p) = contour[static_cast<std::size_t>(p)].x;
      out.at(1, a * kPointsPerContour + p) = contour[static_cast<std::size_t>(p)].y;
    }
  }
  return out;
}

ContourFrame split_articulatory_frame(const ArticulatoryFrame& frame) {
  ContourFrame out;
  for (int a = 0; a < kNumArticulators; ++a) {
    auto& contour = out.articulators[static_cast<std::size_t>(a)];
    for (int p = 0; p < kPointsPerContour; ++p) {
      contour[static_cast<std::size_t>(p)] = {frame.at(0, a * kPointsPerContour + p),
                                              frame.at(1, a * kPointsPerContour + p)};
    }
  }
  return out;
}

Eigen::MatrixXd articulatory_features(const UtteranceRecord& utterance) {
  Eigen::MatrixXd out(utterance.num_frames(), kArticulatoryDim);
  for (int t = 0; t < utterance.num_frames(); ++t) {
    const auto frame = assemble_articulatory_frame(utterance.frames[static_cast<std::size_t>(t)]);
    out.row(t) = Eigen::Map<const Eigen::RowVectorXd>(frame.values.data(), kArticulatoryDim);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mel spectrogram.

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

struct ResolvedMel {
  int hop;
  int window;
  int n_fft;
  double fmin;
  double fmax;
};

ResolvedMel resolve(const MelConfig& cfg) {
  if (cfg.sample_rate <= 0) throw Error("mel: sample rate must be positive");
  if (cfg.bands < 1) throw Error("mel: need at least one band");
  ResolvedMel r{};
  if (cfg.hop > 0) {
    r.hop = cfg.hop;
  } else {
    if (cfg.sample_rate % 50 != 0) {
      throw Error("mel: hop = sample_rate / 50 is not integral for rate " +
                  std::to_string(cfg.sample_rate));
    }
    r.hop = cfg.sample_rate / 50;
  }
  r.window = static_cast<int>(std::lround(cfg.window_ms * 1e-3 * cfg.sample_rate));
  if (r.window < 2) throw Error("mel: window too short");
  r.n_fft = 1;
  while (r.n_fft < r.window) r.n_fft *= 2;
  r.fmin = cfg.fmin;
  r.fmax = cfg.fmax > 0.0 ? cfg.fmax : cfg.sample_rate / 2.0;
  if (!(r.fmax > r.fmin)) throw Error("mel: fmax must exceed fmin");
  return r;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<double> mel_center_frequencies(const MelConfig& cfg) {
  const auto r = resolve(cfg);
  const double lo = hz_to_mel(r.fmin);
  const double hi = hz_to_mel(r.fmax);
  std::vector<double> centers(static_cast<std::size_t>(cfg.bands));
  for (int b = 0; b < cfg.bands; ++b) {
    centers[static_cast<std::size_t>(b)] = mel_to_hz(lo + (hi - lo) * (b + 1) / (cfg.bands + 1));
  }
  return centers;
}

Eigen::MatrixXd mel_spectrogram(std::span<const float> audio, const MelConfig& cfg) {
  if (audio.empty()) throw Error("mel: empty audio");
  const auto r = resolve(cfg);
  const int frames = static_cast<int>(audio.size()) / r.hop;
  const int bins = r.n_fft / 2 + 1;

  // Triangular filters on the mel axis, evaluated at FFT bin frequencies.
  const double mlo = hz_to_mel(r.fmin);
  const double mhi = hz_to_mel(r.fmax);
  Eigen::MatrixXd filters = Eigen::MatrixXd::Zero(bins, cfg.bands);
  for (int b = 0; b < cfg.bands; ++b) {
    const double left = mlo + (mhi - mlo) * b / (cfg.bands + 1);
    const double center = mlo + (mhi - mlo) * (b + 1) / (cfg.bands + 1);
    const double right = mlo + (mhi - mlo) * (b + 2) / (cfg.bands + 1);
    for (int k = 0; k < bins; ++k) {
      const double m = hz_to_mel(static_cast<double>(k) * cfg.sample_rate / r.n_fft);
      double w = 0.0;
      if (m > left && m <= center) {
        w = (m - left) / (center - left);
      } else if (m > center && m < right) {
        w = (right - m) / (right - center);
      }
      filters(k, b) = w;
    }
  }

  std::vector<double> window(static_cast<std::size_t>(r.window));
  for (int i = 0; i < r.window; ++i) {
    window[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / r.window);
  }

  using FftwDoubles = std::unique_ptr<double, decltype(&fftw_free)>;
  using FftwComplex = std::unique_ptr<fftw_complex, decltype(&fftw_free)>;
  FftwDoubles in(fftw_alloc_real(static_cast<std::size_t>(r.n_fft)), &fftw_free);
  FftwComplex out(fftw_alloc_complex(static_cast<std::size_t>(bins)), &fftw_free);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(r.n_fft, in.get(), out.get(), FFTW_ESTIMATE);
  }

  Eigen::MatrixXd mel(frames, cfg.bands);
  Eigen::RowVectorXd magnitude(bins);
  const long n = static_cast<long>(audio.size());
  for (int t = 0; t < frames; ++t) {
    const long begin = static_cast<long>(t) * r.hop - r.window / 2;
    std::fill(in.get(), in.get() + r.n_fft, 0.0);
    for (int i = 0; i < r.window; ++i) {
      const long s = begin + i;
      if (s >= 0 && s < n) in.get()[i] = window[static_cast<std::size_t>(i)] * audio[static_cast<std::size_t>(s)];
    }
    fftw_execute(plan);
    for (int k = 0; k < bins; ++k) magnitude(k) = std::hypot(out.get()[k][0], out.get()[k][1]);
    const Eigen::RowVectorXd energies = magnitude * filters;
    for (int b = 0; b < cfg.bands; ++b) mel(t, b) = std::log(std::max(energies(b), cfg.log_floor));
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return mel;
}

// ---------------------------------------------------------------------------
// Voicing.

Eigen::MatrixXd voicing_track_from_labels(const std::vector<int>& labels, const Vocabulary& vocab) {
  Eigen::MatrixXd track = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), kVoicingDim);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto& token = vocab.token(labels[t]);
    auto category = VoicingCategory::kNonPhonetic;
    if (token.kind == TokenKind::kPhonetic && token.voiced) {
      category = *token.voiced ? VoicingCategory::kVoiced : VoicingCategory::kUnvoiced;
    }
    track(static_cast<Eigen::Index>(t), static_cast<int>(category)) = 1.0;
  }
  return track;
}

Eigen::MatrixXd voicing_track(const UtteranceRecord& utterance, const Vocabulary& vocab) {
  return voicing_track_from_labels(frame_labels(utterance, vocab), vocab);
}

// ---------------------------------------------------------------------------
// Normalization.

NormStats NormStats::fit(const std::vector<const Eigen::MatrixXd*>& features) {
  if (features.empty()) throw Error("normalization: no training features");
  const Eigen::Index dim = features.front()->cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(dim);
  double count = 0.0;
  // Welford, one frame at a time, in corpus order.
  for (const auto* f : features) {
    if (f->cols() != dim) throw Error("normalization: inconsistent feature widths");
    for (Eigen::Index t = 0; t < f->rows(); ++t) {
      count += 1.0;
      const Eigen::VectorXd x = f->row(t).transpose();
      const Eigen::VectorXd delta = x - mean;
      mean += delta / count;
      m2 += delta.cwiseProduct(x - mean);
    }
  }
  if (count < 1.0) throw Error("normalization: no training frames");
  NormStats stats;
  stats.mean = mean;
  stats.std = (m2 / count).cwiseSqrt();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!(stats.std(i) > 1e-8)) stats.std(i) = 1.0;
  }
  return stats;
}

Eigen::MatrixXd NormStats::apply(const Eigen::MatrixXd& features) const {
  if (features.cols() != mean.size()) {
    throw Error("normalization: feature width " + std::to_string(features.cols()) +
                " does not match statistics width " + std::to_string(mean.size()));
  }
  return (features.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

void write_norm_stats(const std::filesystem::path& path, const NormStats& stats) {
  std::ostringstream out;
  out << "feature_index,mean,std\n";
  for (Eigen::Index i = 0; i < stats.mean.size(); ++i) {
    out << i << ',' << format_double(stats.mean(i)) << ',' << format_double(stats.std(i)) << '\n';
  }
  write_text_file(path, out.str());
}

NormStats read_norm_stats(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "feature_index,mean,std") {
    throw Error(path.string() + ": missing header");
  }
  std::vector<double> mean, sd;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto f = split(lines[i], ',');
    if (f.size() != 3) throw Error(where + ": expected 3 columns");
    if (parse_int(f[0], where) != static_cast<long>(mean.size())) {
      throw Error(where + ": feature indices must be consecutive from 0");
    }
    mean.push_back(parse_double(f[1], where));
    sd.push_back(parse_double(f[2], where));
  }
  NormStats stats;
  stats.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  stats.std = Eigen::Map<Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  return stats;
}

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::kArticulatory ? "articulatory" : "acoustic";
}

FeatureKind feature_kind_from_string(std::string_view text) {
  if (text == "articulatory") return FeatureKind::kArticulatory;
  if (text == "acoustic") return FeatureKind::kAcoustic;
  throw ConfigError("unknown feature kind '" + std::string(text) + "'");
}

Eigen::MatrixXd utterance_features(const UtteranceRecord& utterance, FeatureKind kind,
                                   int sample_rate) {
  if (kind == FeatureKind::kArticulatory) return articulatory_features(utterance);
  if (utterance.audio.empty()) {
    throw Error("utterance " + utterance.id + ": acoustic features need an audio track");
  }
  MelConfig cfg;
  cfg.sample_rate = sample_rate;
  const double hop = sample_rate / utterance.frame_rate;
  if (hop != std::floor(hop)) {
    throw Error("utterance " + utterance.id + ": sample rate is not a multiple of the frame rate");
  }
  cfg.hop = static_cast<int>(hop);
  return mel_spectrogram(utterance.audio, cfg);
}

}  // namespace artrec
