// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/gen3d/generator.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "relit/core/error.hpp"

namespace F = torch::nn::functional;

namespace relit::gen3d {

namespace {

torch::Tensor randn(at::IntArrayRef shape, at::Generator& gen, double std) {
    return torch::randn(shape, gen) * std;
}

torch::nn::Linear make_linear(int in, int out, at::Generator& gen) {
    torch::nn::Linear l(in, out);
    torch::NoGradGuard ng;
    l->weight.copy_(randn({out, in}, gen, 1.0 / std::sqrt(double(in))));
    l->bias.zero_();
    return l;
}

torch::Tensor upsample2(const torch::Tensor& x) {
    return F::interpolate(x, F::InterpolateFuncOptions()
                                 .scale_factor(std::vector<double>{2.0, 2.0})
                                 .mode(torch::kBilinear)
                                 .align_corners(false));
}

torch::Tensor lrelu(const torch::Tensor& x) { return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(0.2)); }

}  // namespace

ModConvImpl::ModConvImpl(int in, int out, int kernel, int latent_dim, bool demodulate, at::Generator& gen)
    : kernel_(kernel), demodulate_(demodulate) {
    weight_ = register_parameter("weight", randn({out, in, kernel, kernel}, gen, 1.0 / std::sqrt(double(in * kernel * kernel))));
    bias_ = register_parameter("bias", torch::zeros({out}));
    affine_ = register_module("affine", make_linear(latent_dim, in, gen));
    torch::NoGradGuard ng;
    affine_->bias.fill_(1.0);
}

torch::Tensor ModConvImpl::forward(const torch::Tensor& x, const torch::Tensor& w_layer) {
    const auto style = affine_(w_layer);  // [B, in]
    auto y = F::conv2d(x * style.unsqueeze(-1).unsqueeze(-1), weight_, F::Conv2dFuncOptions().padding(kernel_ / 2));
    if (demodulate_) {
        const auto d = torch::rsqrt(torch::matmul(style.square(), weight_.square().sum({2, 3}).t()) + 1e-8);
        y = y * d.unsqueeze(-1).unsqueeze(-1);
    }
    return y + bias_.view({1, -1, 1, 1});
}

GeneratorImpl::GeneratorImpl(const GeneratorConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    auto gen = at::detail::createCPUGenerator(seed);
    const int C = config_.channels, D = config_.latent_dim, Fc = config_.triplane_channels;
    const_input_ = register_parameter("const_input", randn({1, C, 4, 4}, gen, 1.0));
    for (int i = 0; i < GeneratorConfig::kSynthesisLayers; ++i)
        convs_.push_back(register_module("conv" + std::to_string(i), ModConv(C, C, 3, D, true, gen)));
    to_triplane_ = register_module("to_triplane", ModConv(C, 3 * Fc, 1, D, false, gen));
    decoder_hidden_ = register_module("decoder_hidden", make_linear(Fc, config_.decoder_hidden, gen));
    decoder_out_ = register_module("decoder_out", make_linear(config_.decoder_hidden, 1 + Fc, gen));
    up_conv_ = register_module("up_conv", ModConv(Fc, 32, 3, D, true, gen));
    up_rgb_ = register_module("up_rgb", torch::nn::Conv2d(torch::nn::Conv2dOptions(32, 3, 3).padding(1)));
    torch::NoGradGuard ng;
    up_rgb_->weight.copy_(randn({3, 32, 3, 3}, gen, 1.0 / std::sqrt(32.0 * 9)));
    up_rgb_->bias.zero_();
}

void GeneratorImpl::check_latent(const torch::Tensor& w) const {
    if (w.dim() != 3 || w.size(1) != config_.latent_layers || w.size(2) != config_.latent_dim)
        throw Error("latent must have shape [B, " + std::to_string(config_.latent_layers) + ", " +
                    std::to_string(config_.latent_dim) + "]");
}

Synthesis GeneratorImpl::synthesize(const torch::Tensor& w, const torch::Tensor& override_feature) {
    check_latent(w);
    const auto B = w.size(0);
    const auto shape = config_.feature_shape();
    if (override_feature.defined() &&
        override_feature.sizes() != at::IntArrayRef({B, shape[0], shape[1], shape[2]}))
        throw Error("feature override has shape " + std::string(c10::str(override_feature.sizes())) +
                    ", expected [B, " + std::to_string(shape[0]) + ", " + std::to_string(shape[1]) + ", " +
                    std::to_string(shape[2]) + "]");
    Synthesis out;
    auto x = const_input_.expand({B, -1, -1, -1});
    for (int i = 0; i < GeneratorConfig::kSynthesisLayers; ++i) {
        if (i >= 1 && i <= 3) x = upsample2(x);
        x = lrelu(convs_[static_cast<std::size_t>(i)](x, w.select(1, i)));
        if (i == config_.feature_layer) {
            out.feature = x;
            if (override_feature.defined()) x = override_feature;
        }
    }
    const int Fc = config_.triplane_channels, P = config_.triplane_res;
    out.triplane = to_triplane_(x, w.select(1, GeneratorConfig::kSynthesisLayers)).view({B, 3, Fc, P, P});
    return out;
}

bool GeneratorImpl::extrapolated(const stage::CameraPose& pose) const {
    const double dist = pose.center().norm();
    return !config_.arc.contains(pose.yaw_deg(), pose.pitch_deg(), 1e-6) ||
           std::abs(dist - config_.arc.distance) > 1e-3 * config_.arc.distance;
}

torch::Tensor composite_weights(const torch::Tensor& sigma, const torch::Tensor& delta) {
    const auto alpha = 1.0 - torch::exp(-sigma * delta);
    auto shifted = torch::cat({torch::ones_like(alpha.narrow(-1, 0, 1)),
                               1.0 - alpha.narrow(-1, 0, alpha.size(-1) - 1) + 1e-10},
                              -1);
    return alpha * torch::cumprod(shifted, -1);
}

RenderOutput GeneratorImpl::render(const torch::Tensor& w, std::span<const stage::CameraPose> poses,
                                   const torch::Tensor& override_feature, const RenderOptions& options) {
    check_latent(w);
    const auto B = w.size(0);
    if (static_cast<std::int64_t>(poses.size()) != B) throw Error("render: one pose per latent required");
    const int R = config_.render_res, S = config_.samples, Fc = config_.triplane_channels;
    const std::int64_t P = std::int64_t(R) * R;

    RenderOutput out;
    auto syn = synthesize(w, override_feature);
    out.feature = syn.feature;

    // Ray origins/directions and per-camera slab bounds.
    auto dirs = torch::empty({B, P, 3});
    auto origins = torch::empty({B, 3});
    auto near = torch::empty({B});
    auto span = torch::empty({B});
    auto d_acc = dirs.accessor<float, 3>();
    for (std::int64_t b = 0; b < B; ++b) {
        const auto pose = poses[static_cast<std::size_t>(b)].resized(R, R);
        out.extrapolated.push_back(extrapolated(poses[static_cast<std::size_t>(b)]));
        const Eigen::Vector3d c = pose.center();
        for (int k = 0; k < 3; ++k) origins[b][k] = static_cast<float>(c[k]);
        const double dist = c.norm();
        near[b] = static_cast<float>(std::max(dist - config_.slab_radius, 1e-3));
        span[b] = static_cast<float>(dist + config_.slab_radius - std::max(dist - config_.slab_radius, 1e-3));
        for (int y = 0; y < R; ++y)
            for (int x = 0; x < R; ++x) {
                const auto d = pose.ray(x, y).second;
                for (int k = 0; k < 3; ++k) d_acc[b][y * R + x][k] = static_cast<float>(d[k]);
            }
    }
    torch::Tensor u;
    if (options.stochastic) {
        auto gen = at::detail::createCPUGenerator(options.seed);
        u = (torch::arange(S).to(torch::kFloat) + torch::rand({B, P, S}, gen)) / S;
    } else {
        u = ((torch::arange(S).to(torch::kFloat) + 0.5) / S).expand({B, P, S});
    }
    const auto t = near.view({B, 1, 1}) + u * span.view({B, 1, 1});
    const auto pts = origins.view({B, 1, 1, 3}) + t.unsqueeze(-1) * dirs.unsqueeze(2);  // [B,P,S,3]
    const auto p = (pts / config_.box_half_size).view({B, 1, P * S, 3});

    torch::Tensor feat;
    const std::array<std::array<int64_t, 2>, 3> axes = {{{0, 1}, {0, 2}, {1, 2}}};
    for (int a = 0; a < 3; ++a) {
        const auto grid = torch::stack({p.select(-1, axes[a][0]), p.select(-1, axes[a][1])}, -1);
        auto s = F::grid_sample(syn.triplane.select(1, a), grid,
                                F::GridSampleFuncOptions().mode(torch::kBilinear).padding_mode(torch::kZeros).align_corners(false));
        feat = a == 0 ? s : feat + s;
    }
    const auto x = feat.view({B, Fc, P * S}).transpose(1, 2);
    const auto o = decoder_out_(F::softplus(decoder_hidden_(x))).view({B, P, S, 1 + Fc});
    const auto radius = pts.norm(2, -1);
    const auto sigma = F::softplus(o.select(-1, 0) - 1.0 + 5.0 * (1.0 - radius));
    const auto color = torch::sigmoid(o.narrow(-1, 1, Fc)) * 1.002 - 0.001;
    out.weights = composite_weights(sigma, (span / S).view({B, 1, 1}));
    const auto fimg = (color * out.weights.unsqueeze(-1)).sum(2).transpose(1, 2).reshape({B, Fc, R, R});
    out.low = fimg.narrow(1, 0, 3);
    const auto h = lrelu(up_conv_(upsample2(fimg), w.select(1, GeneratorConfig::kSynthesisLayers + 1)));
    out.image = up_rgb_(h) + upsample2(out.low);
    return out;
}

Image to_image(const torch::Tensor& t) {
    auto x = t.detach().to(torch::kFloat).contiguous();
    if (x.dim() == 4) x = x.squeeze(0);
    if (x.dim() != 3 || x.size(0) != 3) throw Error("to_image expects a [3, H, W] tensor");
    x = x.clamp(0.0, 1.0).permute({1, 2, 0}).contiguous();
    Image img(static_cast<int>(x.size(1)), static_cast<int>(x.size(0)));
    std::memcpy(img.data.data(), x.data_ptr<float>(), img.data.size() * sizeof(float));
    return img;
}

torch::Tensor from_image(const Image& img) {
    return torch::from_blob(const_cast<float*>(img.data.data()), {img.height, img.width, 3}, torch::kFloat)
        .permute({2, 0, 1})
        .unsqueeze(0)
        .clone();
}

torch::Tensor from_images(std::span<const Image> imgs) {
    std::vector<torch::Tensor> v;
    for (const auto& i : imgs) v.push_back(from_image(i));
    return torch::cat(v, 0);
}

}  // namespace relit::gen3d
