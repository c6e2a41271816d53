// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "artrec/error.hpp"
#include "artrec/features.hpp"

using namespace artrec;

namespace {

std::vector<NamedContour> zero_contours() {
  std::vector<NamedContour> out;
  for (auto name : kArticulatorNames) {
    out.push_back({std::string(name), std::vector<Point>(kPointsPerContour)});
  }
  return out;
}

ContourFrame random_frame(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ContourFrame f;
  for (auto& c : f.articulators) {
    for (auto& p : c) p = {n(rng), n(rng)};
  }
  return f;
}

}  // namespace

TEST_CASE("articulatory frame layout") {
  auto contours = zero_contours();
  CHECK(assemble_articulatory_frame(contours) == ArticulatoryFrame{});

  contours[7].points[0] = {0.3, 0.7};
  REQUIRE(contours[7].name == "tongue");
  const auto f = assemble_articulatory_frame(contours);
  CHECK(f.values[350] == 0.3);
  CHECK(f.values[500 + 350] == 0.7);
  CHECK(f.at(0, 350) == 0.3);
  CHECK(f.at(1, 350) == 0.7);

  auto shuffled = contours;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(assemble_articulatory_frame(shuffled) == f);
}

TEST_CASE("articulatory frame errors") {
  auto missing = zero_contours();
  missing.pop_back();
  CHECK_THROWS_AS(assemble_articulatory_frame(missing), Error);

  auto extra = zero_contours();
  extra.push_back({"tongue", std::vector<Point>(kPointsPerContour)});
  CHECK_THROWS_AS(assemble_articulatory_frame(extra), Error);

  auto incisor = zero_contours();
  incisor.push_back({"upper_incisor", std::vector<Point>(kPointsPerContour)});
  CHECK_THROWS_AS(assemble_articulatory_frame(incisor), Error);

  auto short_tongue = zero_contours();
  short_tongue[7].points.resize(49);
  try {
    assemble_articulatory_frame(short_tongue);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("tongue") != std::string::npos);
  }
}

TEST_CASE("assembly is invertible") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const ContourFrame f = random_frame(rng);
    CHECK(split_articulatory_frame(assemble_articulatory_frame(f)) == f);
  }
}

TEST_CASE("mel: frame count and silence") {
  MelConfig cfg;
  const std::vector<float> silence(16000, 0.0f);
  const auto mel = mel_spectrogram(silence, cfg);
  CHECK(mel.rows() == 50);
  CHECK(mel.cols() == 80);
  CHECK((mel.array() == std::log(1e-10)).all());
  CHECK_THROWS_AS(mel_spectrogram(std::vector<float>{}, cfg), Error);
  MelConfig odd;
  odd.sample_rate = 16001;
  CHECK_THROWS(mel_spectrogram(silence, odd));
}

TEST_CASE("mel: pure tone peaks in the nearest band") {
  MelConfig cfg;
  std::vector<float> tone(16000);
  for (std::size_t i = 0; i < tone.size(); ++i) {
    tone[i] = static_cast<float>(std::sin(2.0 * std::numbers::pi * 1000.0 * i / 16000.0));
  }
  const auto centers = mel_center_frequencies(cfg);
  int nearest = 0;
  for (int b = 1; b < cfg.bands; ++b) {
    if (std::abs(centers[b] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = b;
  }
  // Independent centre computation from the HTK mel formula.
  const double top = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
  const double c28 = 700.0 * (std::pow(10.0, top * 29.0 / 81.0 / 2595.0) - 1.0);
  CHECK(centers[28] == doctest::Approx(c28).epsilon(1e-12));
  CHECK(nearest == 28);

  const auto mel = mel_spectrogram(tone, cfg);
  for (Eigen::Index t = 1; t + 1 < mel.rows(); ++t) {
    Eigen::Index arg = 0;
    mel.row(t).maxCoeff(&arg);
    CHECK(arg == nearest);
  }
}

TEST_CASE("mel: trailing silence leaves existing frames unchanged") {
  MelConfig cfg;
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n;
  std::vector<float> audio(16000 + 150);
  for (auto& s : audio) s = n(rng);
  const auto base = mel_spectrogram(audio, cfg);
  auto padded = audio;
  padded.resize(audio.size() + 320, 0.0f);
  const auto more = mel_spectrogram(padded, cfg);
  CHECK(more.rows() == base.rows() + 1);
  CHECK(more.topRows(base.rows()) == base);
}

TEST_CASE("voicing track") {
  const Vocabulary v = default_vocabulary();
  const int a = v.index_of("a");
  const int s = v.index_of("s");
  const int sil = *v.silence_index();
  const auto track = voicing_track_from_labels({a, a, s, sil, v.index_of("b")}, v);
  REQUIRE(track.rows() == 5);
  CHECK(track(0, 0) == 1.0);
  CHECK(track(1, 0) == 1.0);
  CHECK(track(2, 1) == 1.0);
  CHECK(track(3, 2) == 1.0);
  CHECK(track(4, 0) == 1.0);
  for (Eigen::Index t = 0; t < track.rows(); ++t) CHECK(track.row(t).sum() == 1.0);

  UtteranceRecord u;
  u.frames.resize(20);
  u.annotation = std::vector<PhoneSegment>{{"a", a, 0.0, 0.2}, {"s", s, 0.3, 0.4}};
  const auto tr = voicing_track(u, v);
  for (int t = 0; t < 20; ++t) {
    const int expected = t < 10 ? 0 : (t < 15 ? 2 : 1);
    CHECK(tr(t, expected) == 1.0);
  }
}

TEST_CASE("normalization statistics") {
  Eigen::MatrixXd a(3, 2), b(1, 2);
  a << 1, 5, 2, 5, 3, 5;
  b << 4, 5;
  const auto stats = NormStats::fit({&a, &b});
  CHECK(stats.dim() == 2);
  CHECK(stats.mean(0) == doctest::Approx(2.5));
  CHECK(stats.mean(1) == doctest::Approx(5.0));
  const auto z = stats.apply(a);
  CHECK(z.allFinite());
  CHECK(z(0, 1) == 0.0);  // constant feature is centred, not blown up

  Eigen::MatrixXd big = Eigen::MatrixXd::Random(50, 4) * 3.0;
  big.col(2).array() += 10.0;
  const auto s2 = NormStats::fit({&big});
  const auto zb = s2.apply(big);
  for (int j = 0; j < 4; ++j) {
    CHECK(zb.col(j).mean() == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    const double var = (zb.col(j).array() - zb.col(j).mean()).square().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }

  const auto path = std::filesystem::temp_directory_path() / "artrec_test_norm.csv";
  write_norm_stats(path, s2);
  const auto back = read_norm_stats(path);
  CHECK(back.mean == s2.mean);
  CHECK(back.std == s2.std);
  std::filesystem::remove(path);
}
