// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "relit/core/image.hpp"
#include "relit/gen3d/config.hpp"
#include "relit/stage/camera.hpp"

namespace relit::gen3d {

/// Style-modulated convolution: input channels scaled by an affine map of
/// one latent layer, optionally demodulated per output channel.
class ModConvImpl : public torch::nn::Module {
public:
    ModConvImpl(int in, int out, int kernel, int latent_dim, bool demodulate, at::Generator& gen);
    torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& w_layer);

private:
    torch::Tensor weight_, bias_;
    torch::nn::Linear affine_{nullptr};
    int kernel_;
    bool demodulate_;
};
TORCH_MODULE(ModConv);

struct Synthesis {
    torch::Tensor triplane;  ///< [B, 3, F, P, P]
    torch::Tensor feature;   ///< layer-k activation computed from w (before any override)
};

struct RenderOptions {
    /// Jitter samples inside their strata (training); midpoints otherwise.
    bool stochastic = false;
    std::uint64_t seed = 0;
};

struct RenderOutput {
    torch::Tensor image;    ///< [B, 3, 2R, 2R], unclamped display values
    torch::Tensor low;      ///< [B, 3, R, R] neural render
    torch::Tensor weights;  ///< [B, R*R, samples] compositing weights
    torch::Tensor feature;  ///< layer-k tap of w
    std::vector<bool> extrapolated;
};

/// Latent [B, L, D] -> triplane -> volume render -> 2x upsampler.
class GeneratorImpl : public torch::nn::Module {
public:
    explicit GeneratorImpl(const GeneratorConfig& config, std::uint64_t seed = 0);

    /// Runs the modulated stack. When `override_feature` is defined its
    /// value replaces the layer-k output before layers k+1...
    Synthesis synthesize(const torch::Tensor& w, const torch::Tensor& override_feature = {});

    RenderOutput render(const torch::Tensor& w, std::span<const stage::CameraPose> poses,
                        const torch::Tensor& override_feature = {}, const RenderOptions& options = {});

    /// True when a pose lies off the training arc.
    bool extrapolated(const stage::CameraPose& pose) const;

    const GeneratorConfig& config() const { return config_; }

private:
    void check_latent(const torch::Tensor& w) const;

    GeneratorConfig config_;
    torch::Tensor const_input_;
    std::vector<ModConv> convs_;
    ModConv to_triplane_{nullptr};
    torch::nn::Linear decoder_hidden_{nullptr}, decoder_out_{nullptr};
    ModConv up_conv_{nullptr};
    torch::nn::Conv2d up_rgb_{nullptr};
};
TORCH_MODULE(Generator);

/// Alpha-compositing weights along the last axis: w_i = a_i prod_{j<i}(1 - a_j)
/// with a_i = 1 - exp(-sigma_i delta).
torch::Tensor composite_weights(const torch::Tensor& sigma, const torch::Tensor& delta);

/// Clamps a [3, H, W] or [1, 3, H, W] tensor to [0, 1] and copies it out.
Image to_image(const torch::Tensor& t);
/// [1, 3, H, W] float tensor of an image.
torch::Tensor from_image(const Image& img);
torch::Tensor from_images(std::span<const Image> imgs);

}  // namespace relit::gen3d
