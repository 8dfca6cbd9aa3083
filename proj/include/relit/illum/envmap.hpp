// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "relit/core/image.hpp"
#include "relit/stage/light_rig.hpp"

namespace relit::illum {

/// Equirectangular (lat-long) linear radiance map, W == 2H.
///
/// Row v covers polar angle theta = pi (v + 0.5) / H measured from +y;
/// column u covers azimuth phi = 2 pi (u + 0.5) / W - pi measured from +z
/// toward +x. Direction (sin theta sin phi, cos theta, sin theta cos phi).
struct EnvMap {
    std::string name;
    Image pixels;
    std::string source_tag;  ///< file path or "procedural"
    bool ldr_source = false;

    int height() const { return pixels.height; }
    int width() const { return pixels.width; }

    /// Bilinear radiance lookup; wraps in longitude, clamps in latitude.
    Rgb sample(const Eigen::Vector3d& dir) const;
    /// Rotation about +y by `columns` texels (positive turns content toward +x).
    EnvMap rotated_columns(int columns) const;
};

/// Throws unless W == 2H and every pixel is finite and non-negative.
/// NaN/Inf/negative errors name the offending pixel.
void validate(const EnvMap& env);

/// Loads .hdr (RGBE), .exr (float/half) or 8-bit .png (flagged ldr_source,
/// decoded with a 2.2 gamma). Name defaults to the file stem.
EnvMap load_envmap(const std::filesystem::path& path);
/// Writes .hdr or .exr based on the extension.
void save_envmap(const std::filesystem::path& path, const EnvMap& env);

/// Pixel-center direction of texel (u, v).
Eigen::Vector3d texel_direction(int u, int v, int width, int height);
/// Continuous texel coordinates (x, y) of a direction (pixel centers at .5 offsets removed).
Eigen::Vector2d direction_to_texel(const Eigen::Vector3d& dir, int width, int height);

}  // namespace relit::illum
