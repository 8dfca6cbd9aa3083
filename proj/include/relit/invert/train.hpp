// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <json.hpp>

#include "relit/invert/inverter.hpp"
#include "relit/train/data.hpp"

namespace relit::invert {

struct InversionTrainConfig {
    int latent_steps = 3000;  ///< phase 1, latent supervision only
    int image_steps = 300;    ///< phase 1, latent + image loss through the generator
    int afa_steps = 600;      ///< phase 2
    int batch = 8;
    double lr = 1e-3;
    double latent_weight = 10.0;
    std::uint64_t seed = 0;
    int log_every = 100;
    int validation_items = 48;
};

struct ValidationMetrics {
    double psnr = 0.0;  ///< mean PSNR of the reconstruction
    double ld = 0.0;    ///< mean landmark distance, pixels
};

struct InversionTrainReport {
    ValidationMetrics phase1;  ///< encoder only, raw G^k
    ValidationMetrics phase2;  ///< with aligned features
    std::string generator_sha_before, generator_sha_after;
    nlohmann::json to_json() const;
};

/// Two phases: the encoder against the auto-decoder latents (`latents` row
/// s * E + e of the bank) plus an image loss, then the AFA module through
/// the feature-override render path with the encoder frozen. The generator
/// is never updated.
InversionTrainReport train_inversion(Inverter& inverter, const train::ImageBank& bank, const torch::Tensor& latents,
                                     const train::ImageBank& validation, const InversionTrainConfig& config,
                                     const std::function<void(const nlohmann::json&)>& log = {});

/// Reconstruction metrics over a deterministic subset of `bank` items.
/// With `use_afa` false the render uses the raw G^k (no override).
ValidationMetrics validate_inversion(Inverter& inverter, const train::ImageBank& bank, int items, bool use_afa);

}  // namespace relit::invert
