// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/train/losses.hpp"

#include <cmath>

#include "relit/core/error.hpp"
#include "relit/core/rng.hpp"

namespace F = torch::nn::functional;

namespace relit::train {

namespace {
void require_same(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
    if (a.sizes() != b.sizes()) throw Error(std::string(what) + ": shape mismatch");
}
}  // namespace

torch::Tensor loss_reconstruction(const torch::Tensor& prediction, const torch::Tensor& target) {
    require_same(prediction, target, "loss_reconstruction");
    return (prediction - target).abs().mean();
}

torch::Tensor loss_latent(const torch::Tensor& relit, const torch::Tensor& target) {
    require_same(relit, target, "loss_latent");
    return (relit - target).square().mean();
}

torch::Tensor loss_total(const LossParts& parts, const LossWeights& w) {
    if (w.latent < 0 || w.reconstruction < 0 || w.perceptual < 0) throw Error("loss weights must be non-negative");
    return w.latent * parts.latent + w.reconstruction * parts.reconstruction + w.perceptual * parts.perceptual;
}

PerceptualExtractorImpl::PerceptualExtractorImpl(std::uint64_t seed) {
    SplitMix64 rng(seed);
    const int channels[] = {3, 16, 32, 32};
    for (int l = 0; l < 3; ++l) {
        const int in = channels[l], out = channels[l + 1];
        auto k = torch::empty({out, in, 3, 3});
        auto* p = k.data_ptr<float>();
        const double std = 1.0 / std::sqrt(in * 9.0);
        for (std::int64_t i = 0; i < k.numel(); ++i) p[i] = static_cast<float>(rng.normal() * std);
        kernels_.push_back(register_buffer("kernel" + std::to_string(l), k));
    }
}

std::vector<torch::Tensor> PerceptualExtractorImpl::features(const torch::Tensor& image) {
    std::vector<torch::Tensor> out;
    auto x = image;
    for (std::size_t l = 0; l < kernels_.size(); ++l) {
        x = F::relu(F::conv2d(x, kernels_[l].to(x.dtype()), F::Conv2dFuncOptions().padding(1)));
        out.push_back(x);
        if (l + 1 < kernels_.size()) x = F::avg_pool2d(x, F::AvgPool2dFuncOptions(2));
    }
    return out;
}

torch::Tensor PerceptualExtractorImpl::distance(const torch::Tensor& a, const torch::Tensor& b) {
    require_same(a, b, "loss_perceptual");
    const auto fa = features(a);
    const auto fb = features(b);
    auto total = torch::zeros({}, a.options());
    for (std::size_t l = 0; l < fa.size(); ++l) total = total + (fa[l] - fb[l]).square().mean();
    return total;
}

double gradient_check(const std::function<torch::Tensor(const torch::Tensor&)>& f, const torch::Tensor& x0,
                      double eps) {
    auto x = x0.detach().to(torch::kDouble).clone().requires_grad_(true);
    const auto y = f(x);
    if (y.numel() != 1) throw Error("gradient_check needs a scalar function");
    const auto analytic = torch::autograd::grad({y}, {x})[0].detach().contiguous();
    auto numeric = torch::zeros_like(analytic);
    torch::NoGradGuard ng;
    auto flat = x.detach().clone().contiguous();
    auto* p = flat.data_ptr<double>();
    auto* n = numeric.data_ptr<double>();
    for (std::int64_t i = 0; i < flat.numel(); ++i) {
        const double orig = p[i];
        p[i] = orig + eps;
        const double up = f(flat).item<double>();
        p[i] = orig - eps;
        const double down = f(flat).item<double>();
        p[i] = orig;
        n[i] = (up - down) / (2 * eps);
    }
    const double scale = numeric.abs().max().item<double>();
    const double err = (analytic - numeric).abs().max().item<double>();
    return scale > 0 ? err / scale : err;
}

}  // namespace relit::train
