// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace artrec {

/// Runtime failure (bad data, numerical divergence). Maps to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or command-line usage. Maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace artrec
