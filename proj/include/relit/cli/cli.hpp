// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace relit::cli {

/// Entry point of the `relit` tool. Exit codes: 0 ok, 1 other failure,
/// 2 configuration error, 3 missing prerequisite, 4 unknown resource.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relit::cli
