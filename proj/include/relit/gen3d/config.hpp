// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <json.hpp>

#include "relit/stage/camera.hpp"

namespace relit::gen3d {

/// Shapes of the miniature generator. Synthesis layer i runs at spatial
/// resolution 4 * 2^min(i, 3); layer `feature_layer` is the one whose
/// activation can be tapped and overridden.
struct GeneratorConfig {
    int latent_layers = 8;
    int latent_dim = 64;
    int channels = 64;
    int feature_layer = 2;
    int triplane_res = 32;
    int triplane_channels = 16;
    int decoder_hidden = 32;
    int render_res = 32;
    int output_res = 64;
    int samples = 32;
    double box_half_size = 1.5;
    double slab_radius = 1.4;
    stage::CameraArc arc;

    /// Number of modulated convolutions before the triplane projection.
    static constexpr int kSynthesisLayers = 6;

    int layer_resolution(int layer) const;
    /// (channels, height, width) of the layer-k feature code.
    std::array<std::int64_t, 3> feature_shape() const;
    void validate() const;
    nlohmann::json to_json() const;
    static GeneratorConfig from_json(const nlohmann::json& j);
    bool operator==(const GeneratorConfig&) const;
};

}  // namespace relit::gen3d
