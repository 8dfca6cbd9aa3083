// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace relit {

/// Standard base64 with padding.
std::string base64(std::span<const std::uint8_t> bytes);

}  // namespace relit
