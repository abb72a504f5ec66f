// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "dggen/cli.hpp"

int main(int argc, char** argv) {
  return dggen::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
