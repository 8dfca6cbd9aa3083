// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "relit/gen3d/config.hpp"
#include "relit/gen3d/pretrain.hpp"
#include "relit/invert/train.hpp"
#include "relit/io/kvconfig.hpp"
#include "relit/relight/relighter.hpp"
#include "relit/stage/dataset.hpp"
#include "relit/train/relighter_train.hpp"

namespace relit::pipeline {

/// Schema of the pipeline configuration file (see configs/toy.cfg).
std::vector<io::KeySpec> config_schema();

/// KvConfig with the pipeline schema and every default applied.
io::KvConfig default_config();

/// Typed view of a validated configuration.
struct Settings {
    stage::DatasetConfig data;
    gen3d::GeneratorConfig generator;
    gen3d::PretrainConfig pretrain;
    invert::InversionTrainConfig inversion;
    relight::RelighterConfig relighter;
    train::TrainConfig relight;
    relight::FeatureMode mode = relight::FeatureMode::Manipulate;
    int views = 2;  ///< relighter training cameras, most frontal first
    std::vector<int> ablate_views;
    std::vector<int> ablate_subjects;
    int eval_window = 9;
    int bench_frames = 20;
    std::string hash;  ///< hash of the effective configuration
    std::string text;  ///< canonical effective configuration

    /// Camera indices of the `count` most frontal cameras.
    std::vector<int> train_cameras(int count) const;
    std::vector<int> train_cameras() const { return train_cameras(views); }
};

Settings settings_from(const io::KvConfig& config);

}  // namespace relit::pipeline
