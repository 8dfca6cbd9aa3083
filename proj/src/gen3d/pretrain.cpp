// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/gen3d/pretrain.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "relit/core/error.hpp"
#include "relit/eval/metrics.hpp"
#include "relit/train/losses.hpp"

namespace F = torch::nn::functional;

namespace relit::gen3d {

PretrainResult pretrain_generator(Generator& generator, const train::ImageBank& bank, const PretrainConfig& config,
                                  const StepLogger& log) {
    const auto& gc = generator->config();
    const int S = static_cast<int>(bank.subjects().size()), E = static_cast<int>(bank.envs().size());
    const int C = bank.cameras();
    auto gen = at::detail::createCPUGenerator(config.seed ^ 0x51ed);
    auto latents = (torch::randn({S * E, gc.latent_layers, gc.latent_dim}, gen) * config.latent_init_std)
                       .set_requires_grad(true);
    train::PerceptualExtractor perceptual;

    std::vector<torch::optim::OptimizerParamGroup> groups;
    groups.emplace_back(generator->parameters(), std::make_unique<torch::optim::AdamOptions>(config.lr));
    groups.emplace_back(std::vector<torch::Tensor>{latents}, std::make_unique<torch::optim::AdamOptions>(config.latent_lr));
    for (auto& g : groups) static_cast<torch::optim::AdamOptions&>(g.options()).betas({0.5, 0.99});
    torch::optim::Adam opt(std::move(groups), torch::optim::AdamOptions(config.lr).betas({0.5, 0.99}));

    SplitMix64 rng(config.seed);
    generator->train();
    for (int step = 0; step < config.steps; ++step) {
        std::vector<int> s(config.batch), e(config.batch), c(config.batch);
        std::vector<std::int64_t> rows(config.batch);
        std::vector<stage::CameraPose> poses;
        for (int b = 0; b < config.batch; ++b) {
            const int item = static_cast<int>(rng.below(static_cast<std::uint64_t>(S * E)));
            s[b] = item / E;
            e[b] = item % E;
            c[b] = static_cast<int>(rng.below(static_cast<std::uint64_t>(C)));
            rows[b] = item;
            poses.push_back(bank.poses()[static_cast<std::size_t>(c[b])]);
        }
        const auto target = bank.gather(s, e, c);
        const auto w = latents.index_select(0, torch::tensor(rows));
        RenderOptions ro;
        ro.stochastic = true;
        ro.seed = config.seed * 1000003ULL + static_cast<std::uint64_t>(step);
        const auto out = generator->render(w, poses, {}, ro);
        const auto target_low = F::avg_pool2d(target, F::AvgPool2dFuncOptions(2));
        const auto l1 = train::loss_reconstruction(out.image, target);
        const auto low = train::loss_reconstruction(out.low, target_low);
        const auto perc = perceptual->distance(out.image, target);
        const auto reg = w.square().mean();
        const auto loss = l1 + config.low_res_weight * low + config.perceptual_weight * perc + config.latent_reg * reg;
        const double value = loss.item<double>();
        if (!std::isfinite(value)) throw Error("generator pretraining diverged at step " + std::to_string(step));
        opt.zero_grad();
        loss.backward();
        opt.step();
        if (log && (step % config.log_every == 0 || step + 1 == config.steps)) {
            const double mse = (out.image.detach().clamp(0, 1) - target).square().mean().item<double>();
            log({{"stage", "generator"},
                 {"step", step},
                 {"loss", value},
                 {"l1", l1.item<double>()},
                 {"perceptual", perc.item<double>()},
                 {"batch_psnr", 10.0 * std::log10(1.0 / std::max(mse, 1e-10))}});
        }
    }
    generator->eval();

    PretrainResult result;
    result.latents = latents.detach().clone();
    for (int si = 0; si < S; ++si)
        for (int ei = 0; ei < E; ++ei)
            result.keys.push_back(stage::subject_dir_name(bank.subjects()[static_cast<std::size_t>(si)]) + "/" +
                                  bank.envs()[static_cast<std::size_t>(ei)]);
    result.steps = config.steps;
    result.final_psnr = reconstruction_psnr(generator, bank, result.latents);
    return result;
}

double reconstruction_psnr(Generator& generator, const train::ImageBank& bank, const torch::Tensor& latents) {
    torch::NoGradGuard ng;
    const int S = static_cast<int>(bank.subjects().size()), E = static_cast<int>(bank.envs().size());
    double sum = 0.0;
    int count = 0;
    for (int si = 0; si < S; ++si)
        for (int ei = 0; ei < E; ++ei) {
            const auto w = latents[si * E + ei].unsqueeze(0).expand({bank.cameras(), -1, -1});
            const auto out = generator->render(w, bank.poses());
            for (int c = 0; c < bank.cameras(); ++c) {
                sum += eval::psnr(to_image(out.image[c]), to_image(bank.image(si, ei, c)));
                ++count;
            }
        }
    return sum / count;
}

}  // namespace relit::gen3d
