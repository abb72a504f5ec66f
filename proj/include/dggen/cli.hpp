// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace dggen {

// Entry point behind the `dggen` binary; `args` excludes the program name.
// Subcommands: make-toy, ingest, train, generate, evaluate, linkpred.
// Returns 0 on success, 1 on a runtime failure (unreadable file, invalid
// value) with a one-line diagnostic on stderr, 2 on a usage error.
// Relative input paths resolve under $DGGEN_DATA_DIR and relative output
// paths under $DGGEN_OUT_DIR when those variables are set.
int run_command(const std::vector<std::string>& args);

}  // namespace dggen
