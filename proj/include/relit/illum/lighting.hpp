// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "relit/core/image.hpp"
#include "relit/illum/envmap.hpp"
#include "relit/stage/light_rig.hpp"

namespace relit::illum {

/// Environment map reduced to one RGB weight per rig light.
struct LightWeights {
    std::string env_name;
    std::vector<Rgb> weights;

    int size() const { return static_cast<int>(weights.size()); }
    /// Flattened [r0, g0, b0, r1, ...] conditioning vector.
    std::vector<float> flattened() const;
    /// Mean Rec.709 luminance over lights.
    double mean_luminance() const;
    LightWeights operator+(const LightWeights& o) const;
    LightWeights operator*(float s) const;
};

/// Solid angle assigned to each light: equal-area cells, 4 pi / N.
double cell_solid_angle(int light_count);

/// weight_i = bilinear env sample at direction_i times 4 pi / N.
LightWeights downsample_to_weights(const EnvMap& env, const stage::LightRig& rig);

/// Image-based relighting: sum_i weights_i (per channel) * olat_i,
/// accumulated in float32 in light order.
Image relight_ibr(std::span<const Image> olat, const LightWeights& weights);

void save_weights(const std::filesystem::path& path, const LightWeights& w);
LightWeights load_weights(const std::filesystem::path& path, const std::string& env_name);

enum class ExposureMode { AutoMeanLuminance, Fixed };

struct ExposurePolicy {
    ExposureMode mode = ExposureMode::AutoMeanLuminance;
    float fixed_scale = 1.0f;
    float target_mean_luminance = 0.25f;
    float gamma = 2.2f;
};

struct ToneMapped {
    Image ldr;
    float scale = 1.0f;
};

/// Scale so the mean foreground luminance hits the target (foreground =
/// pixels with any non-zero channel), clamp to [0,1], encode with 1/gamma.
/// An all-black image gets scale 1.
ToneMapped tonemap(const Image& radiance, const ExposurePolicy& policy = {});
/// Auto-exposure scale for a set of images sharing one exposure.
float auto_exposure_scale(std::span<const Image> radiance, float target_mean_luminance = 0.25f);

}  // namespace relit::illum
