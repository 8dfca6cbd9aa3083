// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relit/core/rng.hpp"
#include "relit/illum/lighting.hpp"
#include "relit/stage/dataset.hpp"

namespace relit::train {

/// All relit dataset images of the given subjects and envs in memory as
/// one [S, E, C, 3, H, W] tensor, addressed by dataset subject index and
/// env name.
class ImageBank {
public:
    ImageBank(const stage::Dataset& dataset, std::vector<int> subjects, std::vector<std::string> envs);

    const std::vector<int>& subjects() const { return subjects_; }
    const std::vector<std::string>& envs() const { return envs_; }
    int cameras() const { return static_cast<int>(poses_.size()); }
    const std::vector<stage::CameraPose>& poses() const { return poses_; }

    /// [3, H, W] image of (subject slot, env slot, camera).
    torch::Tensor image(int subject_slot, int env_slot, int camera) const;
    /// Batch gather; all spans have equal length.
    torch::Tensor gather(std::span<const int> subject_slots, std::span<const int> env_slots,
                         std::span<const int> cameras) const;
    const illum::LightWeights& weights(int env_slot) const { return weights_[static_cast<std::size_t>(env_slot)]; }
    const stage::SyntheticSubject& subject(int subject_slot) const {
        return subjects_data_[static_cast<std::size_t>(subject_slot)];
    }

private:
    std::vector<int> subjects_;
    std::vector<std::string> envs_;
    std::vector<stage::CameraPose> poses_;
    std::vector<illum::LightWeights> weights_;
    std::vector<stage::SyntheticSubject> subjects_data_;
    torch::Tensor images_;
};

/// One relighting sample: same subject and camera, source and target env.
struct PairIndex {
    int subject_slot = 0;
    int camera = 0;
    int source_env = 0;
    int target_env = 0;
    bool operator==(const PairIndex&) const = default;
};

/// Epoch-based sampler over every (subject, camera, source env, target env)
/// combination, reshuffled each epoch from a seeded generator.
class PairSampler {
public:
    PairSampler(int subjects, std::vector<int> cameras, int envs, std::uint64_t seed);
    std::vector<PairIndex> next_batch(int batch);
    std::size_t epoch_size() const { return all_.size(); }
    int epoch() const { return epoch_; }

private:
    void reshuffle();

    std::vector<PairIndex> all_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    int epoch_ = 0;
    SplitMix64 rng_;
};

/// Deterministic Fisher-Yates permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, SplitMix64& rng);

}  // namespace relit::train
