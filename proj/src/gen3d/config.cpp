// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/gen3d/config.hpp"

#include <algorithm>

#include "relit/core/error.hpp"

namespace relit::gen3d {

int GeneratorConfig::layer_resolution(int layer) const { return 4 << std::min(layer, 3); }

std::array<std::int64_t, 3> GeneratorConfig::feature_shape() const {
    const int r = layer_resolution(feature_layer);
    return {channels, r, r};
}

void GeneratorConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(std::string("generator config: ") + what, ErrorKind::Config);
    };
    require(latent_layers == kSynthesisLayers + 2, "latent_layers must equal synthesis layers + 2");
    require(latent_dim > 0 && channels > 0, "latent_dim and channels must be positive");
    require(feature_layer >= 0 && feature_layer < kSynthesisLayers, "feature_layer out of range");
    require(triplane_res == layer_resolution(kSynthesisLayers - 1), "triplane_res must match the last layer");
    require(output_res == 2 * render_res, "output_res must be twice render_res");
    require(samples > 0 && triplane_channels >= 3 && decoder_hidden > 0, "bad renderer shape");
    require(box_half_size > 0 && slab_radius > 0, "bad scene bounds");
}

nlohmann::json GeneratorConfig::to_json() const {
    return {{"latent_layers", latent_layers},
            {"latent_dim", latent_dim},
            {"channels", channels},
            {"feature_layer", feature_layer},
            {"triplane_res", triplane_res},
            {"triplane_channels", triplane_channels},
            {"decoder_hidden", decoder_hidden},
            {"render_res", render_res},
            {"output_res", output_res},
            {"samples", samples},
            {"box_half_size", box_half_size},
            {"slab_radius", slab_radius},
            {"arc",
             {{"yaw_limit_deg", arc.yaw_limit_deg},
              {"pitch_limit_deg", arc.pitch_limit_deg},
              {"distance", arc.distance},
              {"fov_deg", arc.fov_deg}}}};
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
    GeneratorConfig c;
    c.latent_layers = j.at("latent_layers");
    c.latent_dim = j.at("latent_dim");
    c.channels = j.at("channels");
    c.feature_layer = j.at("feature_layer");
    c.triplane_res = j.at("triplane_res");
    c.triplane_channels = j.at("triplane_channels");
    c.decoder_hidden = j.at("decoder_hidden");
    c.render_res = j.at("render_res");
    c.output_res = j.at("output_res");
    c.samples = j.at("samples");
    c.box_half_size = j.at("box_half_size");
    c.slab_radius = j.at("slab_radius");
    const auto& a = j.at("arc");
    c.arc.yaw_limit_deg = a.at("yaw_limit_deg");
    c.arc.pitch_limit_deg = a.at("pitch_limit_deg");
    c.arc.distance = a.at("distance");
    c.arc.fov_deg = a.at("fov_deg");
    c.validate();
    return c;
}

bool GeneratorConfig::operator==(const GeneratorConfig& o) const { return to_json() == o.to_json(); }

}  // namespace relit::gen3d
