// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <span>

#include "relit/gen3d/generator.hpp"

namespace relit::invert {

/// Strided conv encoder; predicts an offset from the average latent.
class EncoderImpl : public torch::nn::Module {
public:
    EncoderImpl(const gen3d::GeneratorConfig& config, const torch::Tensor& w_avg, std::uint64_t seed = 0);
    /// [B, 3, H, W] at the generator output resolution -> [B, L, D].
    torch::Tensor forward(const torch::Tensor& images);

private:
    gen3d::GeneratorConfig config_;
    std::vector<torch::nn::Conv2d> convs_;
    torch::nn::Linear fc_{nullptr}, head_{nullptr};
    torch::Tensor w_avg_;
};
TORCH_MODULE(Encoder);

/// Adaptive feature alignment: fuses the downsampled residual with G^k
/// through two conv blocks and a sigmoid-gated skip, F = G^k + g * h.
class AfaImpl : public torch::nn::Module {
public:
    AfaImpl(const gen3d::GeneratorConfig& config, std::uint64_t seed = 0);
    torch::Tensor forward(const torch::Tensor& residual, const torch::Tensor& g_k);

private:
    std::array<std::int64_t, 3> shape_;
    torch::nn::Conv2d fuse_{nullptr}, detail_{nullptr}, gate_{nullptr};
};
TORCH_MODULE(Afa);

struct InversionResult {
    torch::Tensor w_s;        ///< [B, L, D]
    torch::Tensor inv_image;  ///< generator render of w_s at the input pose
    torch::Tensor residual;   ///< I_s - inv_image
    torch::Tensor F_s;        ///< aligned feature code
    torch::Tensor G_k_s;      ///< layer-k tap of w_s

    InversionResult slice(std::int64_t i) const;
};

/// Encoder + AFA bound to a frozen generator.
class Inverter {
public:
    Inverter(gen3d::Generator generator, Encoder encoder, Afa afa);

    torch::Tensor encode(const torch::Tensor& images);
    torch::Tensor align_features(const torch::Tensor& residual, const torch::Tensor& g_k);
    InversionResult invert(const torch::Tensor& images, std::span<const stage::CameraPose> poses);

    gen3d::Generator& generator() { return generator_; }
    Encoder& encoder() { return encoder_; }
    Afa& afa() { return afa_; }

private:
    void check_images(const torch::Tensor& images) const;

    gen3d::Generator generator_;
    Encoder encoder_;
    Afa afa_;
};

}  // namespace relit::invert
