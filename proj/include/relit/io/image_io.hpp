// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "relit/core/image.hpp"

namespace relit::io {

/// Scanline OpenEXR, uncompressed, FLOAT channels B/G/R. The reader also
/// accepts HALF channels; any other compression is rejected.
void write_exr(const std::filesystem::path& path, const Image& img);
Image read_exr(const std::filesystem::path& path);

/// Radiance RGBE (.hdr). Writes flat scanlines; reads flat and RLE.
void write_rgbe(const std::filesystem::path& path, const Image& img);
Image read_rgbe(const std::filesystem::path& path);

/// 8-bit RGB PNG. Values are clamped to [0,1] and rounded on write;
/// reads return v/255.
void write_png(const std::filesystem::path& path, const Image& img);
std::vector<std::uint8_t> encode_png(const Image& img);
Image read_png(const std::filesystem::path& path);
Image decode_png(const std::vector<std::uint8_t>& bytes);

/// Writes `bytes` atomically-enough for dataset use: temp file + rename.
/// Throws IoError naming `path` on any failure (e.g. disk full).
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace relit::io
