// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "artrec/features.hpp"
#include "artrec/nn.hpp"
#include "artrec/trainer.hpp"

namespace artrec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the directory relative output paths resolve
/// against.
inline constexpr const char* kOutputRootEnv = "ARTREC_OUTPUT_ROOT";

/// Flat experiment description for `train`.
struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path out;
  std::optional<std::filesystem::path> vocabulary;
  std::optional<std::filesystem::path> class_table;
  FeatureKind feature_kind = FeatureKind::kArticulatory;
  bool use_voicing = false;
  /// Recognizer shape; input_dim and the final classifier width are filled
  /// in from the data and the vocabulary at train time.
  RecognizerConfig recognizer;
  bool adapter_dims_set = false;
  TrainConfig train;
};

/// Parses run config keys. Relative paths resolve against `base_dir`.
/// Unknown keys and missing referenced paths raise ConfigError.
RunConfig parse_run_config(const std::map<std::string, std::string>& kv,
                           const std::filesystem::path& base_dir);

/// Output paths: relative ones are placed under $ARTREC_OUTPUT_ROOT when set.
std::filesystem::path resolve_output_path(const std::filesystem::path& path);

/// Entry point for the `artrec` tool. `args` excludes the program name.
/// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace artrec
