// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace artrec {

inline constexpr int kPointsPerContour = 50;
inline constexpr int kNumArticulators = 10;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using ArticulatorContour = std::array<Point, kPointsPerContour>;

// Feature order. The upper incisor anchors the coordinate system and is
// never part of the feature vector.
inline constexpr std::array<std::string_view, kNumArticulators> kArticulatorNames = {
    "arytenoid_cartilage", "epiglottis", "lower_incisor", "lower_lip",  "pharynx",
    "soft_palate",         "thyroid_cartilage", "tongue", "upper_lip", "vocal_folds"};

inline constexpr std::string_view kUpperIncisor = "upper_incisor";

/// Index into kArticulatorNames, or nullopt (the upper incisor included).
std::optional<int> articulator_index(std::string_view name);

/// All contours of one video frame.
struct ContourFrame {
  std::array<ArticulatorContour, kNumArticulators> articulators{};
  std::optional<ArticulatorContour> upper_incisor;
  friend bool operator==(const ContourFrame&, const ContourFrame&) = default;
};

}  // namespace artrec
