// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "artrec/nn.hpp"

namespace artrec {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// A trained recognizer. `metadata` holds run facts the network itself does
/// not need (feature kind, sample rate, ...); keys are stored with a "meta."
/// prefix next to the config keys.
struct Checkpoint {
  RecognizerConfig config;
  ModelParameters params;
  std::map<std::string, std::string> metadata;
};

/// Layout: "ARTRECKP", u32 version, u64 length + config text, u64 tensor
/// count, then per tensor: u64 name length + name, u32 ndims, u64 rows,
/// u64 cols, rows*cols f64 row-major. All integers and floats little-endian.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace artrec
