// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <optional>

#include "relit/invert/inverter.hpp"
#include "relit/relight/relighter.hpp"
#include "relit/train/data.hpp"
#include "relit/train/losses.hpp"

namespace relit::train {

struct TrainConfig {
    LossWeights weights;
    double lr = 3e-4;
    int batch = 8;
    int steps = 2000;
    std::uint64_t seed = 0;
    int validate_every = 200;
    int checkpoint_every = 100;
    int validation_pairs = 16;
    void validate() const;
};

/// Cached inversion of one training image.
struct CachedInversion {
    torch::Tensor w;    ///< [L, D]
    torch::Tensor F;    ///< aligned feature code
    torch::Tensor G_k;  ///< raw layer-k tap
};

/// Inversions of every (subject, env, camera) image of a bank for the
/// given cameras, computed once with the frozen encoder and AFA.
class InversionCache {
public:
    InversionCache(invert::Inverter& inverter, const ImageBank& bank, const std::vector<int>& cameras);
    const CachedInversion& at(int subject_slot, int env_slot, int camera) const;

private:
    std::map<std::tuple<int, int, int>, CachedInversion> items_;
};

struct LossValues {
    double latent = 0, reconstruction = 0, perceptual = 0, total = 0;
    nlohmann::json to_json() const;
};

struct RelighterTrainReport {
    LossValues validation_start, validation_end;
    std::map<std::string, std::string> frozen_before, frozen_after;
    int steps = 0;
    int resumed_from = 0;
    double seconds = 0.0;
    nlohmann::json to_json() const;
};

struct RelighterTrainOptions {
    std::vector<int> cameras;  ///< training viewpoints (bank camera indices)
    /// When set, state is saved here every `checkpoint_every` steps and an
    /// existing state file is resumed from.
    std::optional<std::filesystem::path> state_path;
    std::function<void(const nlohmann::json&)> log;
};

/// Optimizes the relighting loss with Adam while the generator, encoder and
/// AFA stay frozen. Source and target share subject and camera; the
/// target latent is the cached inversion of the target image.
RelighterTrainReport train_relighter(relight::RelightModel& model, invert::Inverter& inverter, const ImageBank& bank,
                                     const ImageBank& validation, const TrainConfig& config,
                                     const RelighterTrainOptions& options);

/// Loss parts of a batch of pairs.
LossParts relight_losses(relight::RelightModel& model, PerceptualExtractor& perceptual, const InversionCache& cache,
                         const ImageBank& bank, std::span<const PairIndex> pairs);

}  // namespace relit::train
