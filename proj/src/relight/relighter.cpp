// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/relight/relighter.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "relit/core/error.hpp"

namespace relit::relight {

nlohmann::json RelighterConfig::to_json() const {
    return {{"lights", lights}, {"hidden", hidden}, {"layers", layers}};
}

RelighterConfig RelighterConfig::from_json(const nlohmann::json& j) {
    RelighterConfig c;
    c.lights = j.at("lights");
    c.hidden = j.at("hidden");
    c.layers = j.at("layers");
    return c;
}

RelighterImpl::RelighterImpl(const gen3d::GeneratorConfig& generator, const RelighterConfig& config,
                             std::uint64_t seed)
    : generator_(generator), config_(config) {
    if (config_.layers < 2 || config_.hidden < 1 || config_.lights < 1) throw Error("bad relighter shape", ErrorKind::Config);
    auto gen = at::detail::createCPUGenerator(seed);
    const int latent = generator_.latent_layers * generator_.latent_dim;
    int in = latent + 3 * config_.lights;
    torch::NoGradGuard ng;
    for (int i = 0; i < config_.layers; ++i) {
        const bool last = i + 1 == config_.layers;
        const int out = last ? latent : config_.hidden;
        torch::nn::Linear l(in, out);
        if (last)
            l->weight.zero_();
        else
            l->weight.copy_(torch::randn({out, in}, gen) * std::sqrt(2.0 / in));
        l->bias.zero_();
        layers_.push_back(register_module("fc" + std::to_string(i), l));
        in = out;
    }
}

torch::Tensor RelighterImpl::forward(const torch::Tensor& w_s, const torch::Tensor& conditioning) {
    if (conditioning.dim() != 2 || conditioning.size(1) != 3 * config_.lights)
        throw Error("conditioning vector must have length 3N = " + std::to_string(3 * config_.lights));
    if (w_s.dim() != 3 || w_s.size(0) != conditioning.size(0) || w_s.size(1) != generator_.latent_layers ||
        w_s.size(2) != generator_.latent_dim)
        throw Error("relighter: latent shape mismatch");
    auto x = torch::cat({w_s.flatten(1), conditioning}, 1);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        x = layers_[i](x);
        if (i + 1 < layers_.size()) x = torch::relu(x);
    }
    return x.view_as(w_s);
}

Conditioning condition(const illum::LightWeights& weights) {
    const double lum = weights.mean_luminance();
    Conditioning c;
    c.scale = lum > 0 ? lum : 1.0;
    const auto flat = weights.flattened();
    c.values = torch::tensor(flat, torch::kFloat) / static_cast<float>(c.scale);
    return c;
}

torch::Tensor condition_batch(std::span<const illum::LightWeights> weights) {
    std::vector<torch::Tensor> rows;
    for (const auto& w : weights) rows.push_back(condition(w).values);
    return torch::stack(rows);
}

torch::Tensor apply_offset(const torch::Tensor& w_s, const torch::Tensor& delta_w) {
    if (w_s.sizes() != delta_w.sizes()) throw Error("apply_offset: shape mismatch");
    return w_s + delta_w;
}

torch::Tensor manipulate_features(const torch::Tensor& F_s, const torch::Tensor& G_k_r, const torch::Tensor& G_k_s) {
    if (F_s.sizes() != G_k_r.sizes() || F_s.sizes() != G_k_s.sizes())
        throw Error("manipulate_features: feature code shapes differ");
    return F_s + G_k_r - G_k_s;
}

std::string to_string(FeatureMode m) { return m == FeatureMode::Manipulate ? "manipulate" : "direct"; }

FeatureMode feature_mode_from_string(const std::string& s) {
    if (s == "manipulate") return FeatureMode::Manipulate;
    if (s == "direct") return FeatureMode::Direct;
    throw Error("unknown feature mode '" + s + "' (expected manipulate or direct)", ErrorKind::Config);
}

RelightModel::RelightModel(gen3d::Generator generator, Relighter relighter, FeatureMode mode)
    : generator_(std::move(generator)), relighter_(std::move(relighter)), mode_(mode) {}

torch::Tensor RelightModel::predict_offset(const torch::Tensor& w_s, const torch::Tensor& conditioning) {
    return relighter_(w_s, conditioning);
}

RelightOutput RelightModel::relight_latent(const invert::InversionResult& inv, const torch::Tensor& conditioning) {
    RelightOutput out;
    out.delta_w = predict_offset(inv.w_s, conditioning);
    out.w_r = apply_offset(inv.w_s, out.delta_w);
    if (mode_ == FeatureMode::Manipulate) {
        out.G_k_r = generator_->synthesize(out.w_r).feature;
        out.F_r = manipulate_features(inv.F_s, out.G_k_r, inv.G_k_s);
    }
    return out;
}

gen3d::RenderOutput RelightModel::render(const RelightOutput& relit, std::span<const stage::CameraPose> poses,
                                         const gen3d::RenderOptions& options) {
    return generator_->render(relit.w_r, poses, mode_ == FeatureMode::Manipulate ? relit.F_r : torch::Tensor(),
                              options);
}

gen3d::RenderOutput RelightModel::relight_full(const invert::InversionResult& inv, const torch::Tensor& conditioning,
                                               std::span<const stage::CameraPose> poses) {
    return render(relight_latent(inv, conditioning), poses);
}

}  // namespace relit::relight
