// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <span>
#include <string>

#include "relit/gen3d/generator.hpp"
#include "relit/illum/lighting.hpp"
#include "relit/invert/inverter.hpp"

namespace relit::relight {

struct RelighterConfig {
    int lights = 24;
    int hidden = 256;
    int layers = 14;
    nlohmann::json to_json() const;
    static RelighterConfig from_json(const nlohmann::json& j);
};

/// MLP over [flatten(w_s), E_t] predicting a latent offset. The last layer
/// starts at zero so an untrained network is the identity relighting.
class RelighterImpl : public torch::nn::Module {
public:
    RelighterImpl(const gen3d::GeneratorConfig& generator, const RelighterConfig& config, std::uint64_t seed = 0);
    /// w_s [B, L, D], conditioning [B, 3N] -> delta_w [B, L, D].
    torch::Tensor forward(const torch::Tensor& w_s, const torch::Tensor& conditioning);
    const RelighterConfig& config() const { return config_; }

private:
    gen3d::GeneratorConfig generator_;
    RelighterConfig config_;
    std::vector<torch::nn::Linear> layers_;
};
TORCH_MODULE(Relighter);

/// Flattened weights divided by their mean Rec.709 luminance; `scale`
/// keeps the divisor.
struct Conditioning {
    torch::Tensor values;  ///< [3N]
    double scale = 1.0;
};
Conditioning condition(const illum::LightWeights& weights);
torch::Tensor condition_batch(std::span<const illum::LightWeights> weights);

struct RelightOutput {
    torch::Tensor delta_w;
    torch::Tensor w_r;
    torch::Tensor G_k_r;
    torch::Tensor F_r;
};

/// w_r = w_s + delta_w.
torch::Tensor apply_offset(const torch::Tensor& w_s, const torch::Tensor& delta_w);
/// F_r = F_s + G_k_r - G_k_s.
torch::Tensor manipulate_features(const torch::Tensor& F_s, const torch::Tensor& G_k_r, const torch::Tensor& G_k_s);

enum class FeatureMode {
    Manipulate,  ///< render with the layer-k override F_r
    Direct,      ///< render w_r alone (no feature-space transfer)
};
std::string to_string(FeatureMode m);
FeatureMode feature_mode_from_string(const std::string& s);

/// Relighter bound to the frozen generator.
class RelightModel {
public:
    RelightModel(gen3d::Generator generator, Relighter relighter, FeatureMode mode = FeatureMode::Manipulate);

    torch::Tensor predict_offset(const torch::Tensor& w_s, const torch::Tensor& conditioning);
    /// Offset, relit latent, its layer-k tap and the manipulated feature code.
    RelightOutput relight_latent(const invert::InversionResult& inv, const torch::Tensor& conditioning);
    gen3d::RenderOutput render(const RelightOutput& relit, std::span<const stage::CameraPose> poses,
                               const gen3d::RenderOptions& options = {});
    /// relight_latent followed by render.
    gen3d::RenderOutput relight_full(const invert::InversionResult& inv, const torch::Tensor& conditioning,
                                     std::span<const stage::CameraPose> poses);

    Relighter& relighter() { return relighter_; }
    gen3d::Generator& generator() { return generator_; }
    FeatureMode mode() const { return mode_; }

private:
    gen3d::Generator generator_;
    Relighter relighter_;
    FeatureMode mode_;
};

}  // namespace relit::relight
