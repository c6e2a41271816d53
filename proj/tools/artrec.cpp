// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

#include "artrec/cli.hpp"

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_logger_st("artrec"));
  return artrec::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
