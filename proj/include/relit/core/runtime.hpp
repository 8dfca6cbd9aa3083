// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace relit {

/// Single intra-op thread and flush-to-zero for denormals. Call once at
/// program start before any tensor work; later calls are no-ops.
void init_runtime();

}  // namespace relit
