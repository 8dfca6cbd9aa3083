// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/invert/inverter.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "relit/core/error.hpp"

namespace F = torch::nn::functional;

namespace relit::invert {

namespace {

template <typename M>
void init_conv(M& m, at::Generator& gen, double gain) {
    torch::NoGradGuard ng;
    const auto fan_in = m->weight.size(1) * m->weight.size(2) * m->weight.size(3);
    m->weight.copy_(torch::randn(m->weight.sizes(), gen) * (gain / std::sqrt(double(fan_in))));
    m->bias.zero_();
}

torch::Tensor lrelu(const torch::Tensor& x) { return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(0.2)); }

}  // namespace

EncoderImpl::EncoderImpl(const gen3d::GeneratorConfig& config, const torch::Tensor& w_avg, std::uint64_t seed)
    : config_(config) {
    auto gen = at::detail::createCPUGenerator(seed);
    const int channels[] = {3, 32, 64, 128, 128};
    for (int i = 0; i < 4; ++i) {
        torch::nn::Conv2d c(torch::nn::Conv2dOptions(channels[i], channels[i + 1], 3).stride(2).padding(1));
        init_conv(c, gen, std::sqrt(2.0));
        convs_.push_back(register_module("conv" + std::to_string(i), c));
    }
    const int side = config_.output_res / 16;
    fc_ = register_module("fc", torch::nn::Linear(128 * side * side, 512));
    head_ = register_module("head", torch::nn::Linear(512, config_.latent_layers * config_.latent_dim));
    torch::NoGradGuard ng;
    fc_->weight.copy_(torch::randn(fc_->weight.sizes(), gen) * std::sqrt(2.0 / fc_->weight.size(1)));
    fc_->bias.zero_();
    head_->weight.zero_();
    head_->bias.zero_();
    w_avg_ = register_buffer("w_avg", w_avg.detach().clone().reshape({config_.latent_layers, config_.latent_dim}));
}

torch::Tensor EncoderImpl::forward(const torch::Tensor& images) {
    auto x = images;
    for (auto& c : convs_) x = lrelu(c(x));
    x = lrelu(fc_(x.flatten(1)));
    return w_avg_.unsqueeze(0) + head_(x).view({-1, config_.latent_layers, config_.latent_dim});
}

AfaImpl::AfaImpl(const gen3d::GeneratorConfig& config, std::uint64_t seed) : shape_(config.feature_shape()) {
    auto gen = at::detail::createCPUGenerator(seed);
    const auto C = shape_[0];
    fuse_ = register_module("fuse", torch::nn::Conv2d(torch::nn::Conv2dOptions(C + 3, C, 3).padding(1)));
    detail_ = register_module("detail", torch::nn::Conv2d(torch::nn::Conv2dOptions(C, C, 3).padding(1)));
    gate_ = register_module("gate", torch::nn::Conv2d(torch::nn::Conv2dOptions(C, C, 3).padding(1)));
    init_conv(fuse_, gen, std::sqrt(2.0));
    torch::NoGradGuard ng;
    // Starts as the identity F = G^k.
    detail_->weight.zero_();
    detail_->bias.zero_();
    gate_->weight.zero_();
    gate_->bias.fill_(-2.0);
}

torch::Tensor AfaImpl::forward(const torch::Tensor& residual, const torch::Tensor& g_k) {
    if (g_k.dim() != 4 || g_k.size(1) != shape_[0] || g_k.size(2) != shape_[1] || g_k.size(3) != shape_[2])
        throw Error("align_features: feature code shape mismatch");
    if (residual.dim() != 4 || residual.size(0) != g_k.size(0) || residual.size(1) != 3)
        throw Error("align_features: residual must be [B, 3, H, W] with the feature batch size");
    const auto r = F::interpolate(residual, F::InterpolateFuncOptions()
                                                .size(std::vector<std::int64_t>{shape_[1], shape_[2]})
                                                .mode(torch::kBilinear)
                                                .align_corners(false)
                                                .antialias(true));
    const auto h = lrelu(fuse_(torch::cat({g_k, 4.0 * r}, 1)));
    return g_k + torch::sigmoid(gate_(h)) * detail_(h);
}

InversionResult InversionResult::slice(std::int64_t i) const {
    return {w_s.narrow(0, i, 1), inv_image.narrow(0, i, 1), residual.narrow(0, i, 1), F_s.narrow(0, i, 1),
            G_k_s.narrow(0, i, 1)};
}

Inverter::Inverter(gen3d::Generator generator, Encoder encoder, Afa afa)
    : generator_(std::move(generator)), encoder_(std::move(encoder)), afa_(std::move(afa)) {}

void Inverter::check_images(const torch::Tensor& images) const {
    const int res = generator_->config().output_res;
    if (images.dim() != 4 || images.size(1) != 3 || images.size(2) != res || images.size(3) != res)
        throw Error("input image must be " + std::to_string(res) + "x" + std::to_string(res) + " RGB, got " +
                    std::string(c10::str(images.sizes())));
}

torch::Tensor Inverter::encode(const torch::Tensor& images) {
    check_images(images);
    return encoder_(images);
}

torch::Tensor Inverter::align_features(const torch::Tensor& residual, const torch::Tensor& g_k) {
    return afa_(residual, g_k);
}

InversionResult Inverter::invert(const torch::Tensor& images, std::span<const stage::CameraPose> poses) {
    InversionResult r;
    r.w_s = encode(images);
    auto render = generator_->render(r.w_s, poses);
    r.inv_image = render.image;
    r.G_k_s = render.feature;
    r.residual = images - r.inv_image;
    r.F_s = afa_(r.residual, r.G_k_s);
    return r;
}

}  // namespace relit::invert
