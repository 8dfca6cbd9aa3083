// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/core/runtime.hpp"

#include <torch/torch.h>

#include <mutex>

namespace relit {

void init_runtime() {
    static std::once_flag once;
    std::call_once(once, [] {
        at::set_num_threads(1);
        at::globalContext().setFlushDenormal(true);
    });
}

}  // namespace relit
