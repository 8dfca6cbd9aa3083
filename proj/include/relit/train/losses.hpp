// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <string>

namespace relit::train {

struct LossWeights {
    double latent = 10.0;           ///< lambda0
    double reconstruction = 0.01;   ///< lambda1
    double perceptual = 1.0;        ///< lambda2
};

struct LossParts {
    torch::Tensor latent;
    torch::Tensor reconstruction;
    torch::Tensor perceptual;
};

/// Mean absolute error over every element.
torch::Tensor loss_reconstruction(const torch::Tensor& prediction, const torch::Tensor& target);
/// Mean squared error over latent entries.
torch::Tensor loss_latent(const torch::Tensor& relit, const torch::Tensor& target);
/// lambda0 * latent + lambda1 * reconstruction + lambda2 * perceptual.
torch::Tensor loss_total(const LossParts& parts, const LossWeights& weights);

/// Seed of the fixed feature pyramid. Changing it changes every perceptual
/// loss value, so it is part of the model definition.
inline constexpr std::uint64_t kPerceptualSeed = 0x9e3779b97f4a7c15ULL;

/// Fixed random convolutional pyramid (3 -> 16 -> 32 -> 32 channels, 2x
/// average pooling between scales). Weights are generated from a seed
/// with SplitMix64 and never trained.
class PerceptualExtractorImpl : public torch::nn::Module {
public:
    explicit PerceptualExtractorImpl(std::uint64_t seed = kPerceptualSeed);
    /// Activations at every scale, computed in the input's dtype.
    std::vector<torch::Tensor> features(const torch::Tensor& image);
    /// Sum over scales of the mean squared feature difference.
    torch::Tensor distance(const torch::Tensor& a, const torch::Tensor& b);

private:
    std::vector<torch::Tensor> kernels_;
};
TORCH_MODULE(PerceptualExtractor);

/// Largest |analytic - numeric| divided by the largest |numeric| entry, for
/// d f(x) / dx with f scalar. Evaluated in double with central differences.
double gradient_check(const std::function<torch::Tensor(const torch::Tensor&)>& f, const torch::Tensor& x,
                      double eps = 1e-6);

}  // namespace relit::train
