// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace artrec {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Like format_double, but never fewer than `min_decimals` fractional digits.
std::string format_double_min_decimals(double value, int min_decimals);

double parse_double(std::string_view text, std::string_view context);
long parse_int(std::string_view text, std::string_view context);
bool parse_bool(std::string_view text, std::string_view context);

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view text);

std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Flat `key=value` file; '#' starts a comment, blank lines are skipped.
/// Duplicate keys are rejected.
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);
std::map<std::string, std::string> parse_key_value_text(std::string_view text,
                                                        std::string_view context);

}  // namespace artrec
