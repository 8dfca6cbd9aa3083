// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "relit/illum/envmap.hpp"

namespace relit::illum {

/// Procedural outdoor/indoor-like lighting: tinted ambient sky plus one or
/// two colored lobes. Deterministic in (index, seed).
EnvMap procedural_envmap(int index, std::uint64_t seed, int height = 32);

/// Ensures `dir` holds `count` maps named env00, env01, ... as Radiance
/// files, writing any that are missing, and returns them as read back from
/// disk (so in-memory values equal the RGBE-quantized files).
std::vector<EnvMap> ensure_library(const std::filesystem::path& dir, int count, std::uint64_t seed);

/// Loads every .hdr/.exr in `dir`, sorted by name.
std::vector<EnvMap> load_library(const std::filesystem::path& dir);

}  // namespace relit::illum
