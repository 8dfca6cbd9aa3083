// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <json.hpp>

#include "relit/gen3d/generator.hpp"
#include "relit/train/data.hpp"

namespace relit::gen3d {

using StepLogger = std::function<void(const nlohmann::json&)>;

struct PretrainConfig {
    int steps = 1500;
    int batch = 8;
    double lr = 2e-3;
    double latent_lr = 1e-2;
    double latent_init_std = 0.05;
    double latent_reg = 1e-3;
    double low_res_weight = 1.0;
    double perceptual_weight = 1.0;
    std::uint64_t seed = 0;
    int log_every = 50;
};

struct PretrainResult {
    torch::Tensor latents;  ///< [S * E, L, D], row s * E + e
    std::vector<std::string> keys;  ///< "<subject>/<env>" per row
    double final_psnr = 0.0;  ///< mean reconstruction PSNR over every training image
    int steps = 0;
};

/// Auto-decoding: one learnable latent per (subject, env) of the bank,
/// optimized jointly with the generator under L1 + perceptual + low-res L1
/// reconstruction across every camera. Throws on a non-finite loss naming
/// the step.
PretrainResult pretrain_generator(Generator& generator, const train::ImageBank& bank, const PretrainConfig& config,
                                  const StepLogger& log = {});

/// Mean PSNR of renders of `latents` against the bank images, all cameras.
double reconstruction_psnr(Generator& generator, const train::ImageBank& bank, const torch::Tensor& latents);

}  // namespace relit::gen3d
