// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/invert/train.hpp"

#include <cmath>

#include "relit/core/error.hpp"
#include "relit/eval/metrics.hpp"
#include "relit/gen3d/checkpoint.hpp"
#include "relit/train/losses.hpp"

namespace relit::invert {

nlohmann::json InversionTrainReport::to_json() const {
    return {{"phase1", {{"psnr", phase1.psnr}, {"ld", phase1.ld}}},
            {"phase2", {{"psnr", phase2.psnr}, {"ld", phase2.ld}}},
            {"generator_sha_before", generator_sha_before},
            {"generator_sha_after", generator_sha_after}};
}

namespace {

struct Batch {
    std::vector<int> s, e, c;
    std::vector<std::int64_t> rows;
    std::vector<stage::CameraPose> poses;
    torch::Tensor images;
};

Batch sample(const train::ImageBank& bank, int size, SplitMix64& rng) {
    Batch b;
    const int S = static_cast<int>(bank.subjects().size()), E = static_cast<int>(bank.envs().size());
    for (int i = 0; i < size; ++i) {
        const int s = static_cast<int>(rng.below(static_cast<std::uint64_t>(S)));
        const int e = static_cast<int>(rng.below(static_cast<std::uint64_t>(E)));
        const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(bank.cameras())));
        b.s.push_back(s);
        b.e.push_back(e);
        b.c.push_back(c);
        b.rows.push_back(s * E + e);
        b.poses.push_back(bank.poses()[static_cast<std::size_t>(c)]);
    }
    b.images = bank.gather(b.s, b.e, b.c);
    return b;
}

void check_finite(double v, const char* phase, int step) {
    if (!std::isfinite(v)) throw Error(std::string(phase) + " diverged at step " + std::to_string(step));
}

}  // namespace

ValidationMetrics validate_inversion(Inverter& inverter, const train::ImageBank& bank, int items, bool use_afa) {
    torch::NoGradGuard ng;
    SplitMix64 rng(0xba11);
    ValidationMetrics m;
    int n = 0;
    while (n < items) {
        const int size = std::min(8, items - n);
        const auto b = sample(bank, size, rng);
        const auto inv = inverter.invert(b.images, b.poses);
        torch::Tensor out = use_afa ? inverter.generator()->render(inv.w_s, b.poses, inv.F_s).image : inv.inv_image;
        for (int i = 0; i < size; ++i) {
            const auto pred = gen3d::to_image(out[i]);
            const auto ref = gen3d::to_image(b.images[i]);
            m.psnr += eval::psnr(pred, ref);
            m.ld += eval::image_landmark_distance(pred, ref, bank.subject(b.s[static_cast<std::size_t>(i)]),
                                                  b.poses[static_cast<std::size_t>(i)]);
        }
        n += size;
    }
    m.psnr /= n;
    m.ld /= n;
    return m;
}

InversionTrainReport train_inversion(Inverter& inverter, const train::ImageBank& bank, const torch::Tensor& latents,
                                     const train::ImageBank& validation, const InversionTrainConfig& config,
                                     const std::function<void(const nlohmann::json&)>& log) {
    auto& generator = inverter.generator();
    generator->eval();
    for (auto& p : generator->parameters()) p.set_requires_grad(false);
    InversionTrainReport report;
    report.generator_sha_before = gen3d::weights_checksum(*generator);
    train::PerceptualExtractor perceptual;
    SplitMix64 rng(config.seed);

    auto& encoder = inverter.encoder();
    encoder->train();
    torch::optim::Adam enc_opt(encoder->parameters(), torch::optim::AdamOptions(config.lr));
    const int phase1 = config.latent_steps + config.image_steps;
    for (int step = 0; step < phase1; ++step) {
        const auto b = sample(bank, config.batch, rng);
        const auto w = encoder(b.images);
        const auto lat = train::loss_latent(w, latents.index_select(0, torch::tensor(b.rows)));
        auto loss = config.latent_weight * lat;
        torch::Tensor img_loss;
        if (step >= config.latent_steps) {
            const auto out = generator->render(w, b.poses).image;
            img_loss = train::loss_reconstruction(out, b.images) + perceptual->distance(out, b.images);
            loss = loss + img_loss;
        }
        const double v = loss.item<double>();
        check_finite(v, "encoder training", step);
        enc_opt.zero_grad();
        loss.backward();
        enc_opt.step();
        if (log && (step % config.log_every == 0 || step + 1 == phase1))
            log({{"stage", "inversion"}, {"phase", 1}, {"step", step}, {"loss", v}, {"latent", lat.item<double>()},
                 {"image", img_loss.defined() ? img_loss.item<double>() : 0.0}});
    }
    encoder->eval();
    for (auto& p : encoder->parameters()) p.set_requires_grad(false);
    report.phase1 = validate_inversion(inverter, validation, config.validation_items, false);
    if (log) log({{"stage", "inversion"}, {"phase", 1}, {"validation_psnr", report.phase1.psnr}, {"validation_ld", report.phase1.ld}});

    auto& afa = inverter.afa();
    afa->train();
    torch::optim::Adam afa_opt(afa->parameters(), torch::optim::AdamOptions(config.lr));
    for (int step = 0; step < config.afa_steps; ++step) {
        const auto b = sample(bank, config.batch, rng);
        torch::Tensor w, inv_image, g_k;
        {
            torch::NoGradGuard ng;
            w = encoder(b.images);
            const auto r = generator->render(w, b.poses);
            inv_image = r.image;
            g_k = r.feature;
        }
        const auto f_s = afa(b.images - inv_image, g_k);
        const auto out = generator->render(w, b.poses, f_s).image;
        const auto loss = train::loss_reconstruction(out, b.images) + perceptual->distance(out, b.images);
        const double v = loss.item<double>();
        check_finite(v, "feature alignment training", step);
        afa_opt.zero_grad();
        loss.backward();
        afa_opt.step();
        if (log && (step % config.log_every == 0 || step + 1 == config.afa_steps))
            log({{"stage", "inversion"}, {"phase", 2}, {"step", step}, {"loss", v}});
    }
    afa->eval();
    for (auto& p : afa->parameters()) p.set_requires_grad(false);
    report.phase2 = validate_inversion(inverter, validation, config.validation_items, true);
    if (log) log({{"stage", "inversion"}, {"phase", 2}, {"validation_psnr", report.phase2.psnr}, {"validation_ld", report.phase2.ld}});
    report.generator_sha_after = gen3d::weights_checksum(*generator);
    return report;
}

}  // namespace relit::invert
