// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/pipeline/settings.hpp"

#include "relit/core/error.hpp"

namespace relit::pipeline {

using io::KeySpec;
using io::ValueType;

std::vector<KeySpec> config_schema() {
    return {
        {"data.subjects", ValueType::Int, "24", "subjects, training and held out", 2, 10000},
        {"data.cameras", ValueType::Int, "8", "cameras on the frontal arc", 1, 64},
        {"data.lights", ValueType::Int, "24", "lightstage lights", 1, 4096},
        {"data.envs", ValueType::Int, "32", "environment maps, training and held out", 2, 1000},
        {"data.resolution", ValueType::Int, "64", "image side in pixels", 8, 1024},
        {"data.seed", ValueType::Int, "0", "first subject seed", 0},
        {"data.env_seed", ValueType::Int, "7", "environment library seed", 0},
        {"data.holdout_subjects", ValueType::Int, "4", "trailing subjects held out", 1},
        {"data.holdout_envs", ValueType::Int, "4", "trailing envs held out", 2},
        {"arc.yaw", ValueType::Real, "45", "yaw limit, degrees", 0, 90},
        {"arc.pitch", ValueType::Real, "15", "pitch limit, degrees", 0, 60},

        {"gen.latent_layers", ValueType::Int, "8", "style layers L", 7, 64},
        {"gen.latent_dim", ValueType::Int, "64", "latent width D", 4, 1024},
        {"gen.channels", ValueType::Int, "64", "synthesis channels", 4, 1024},
        {"gen.feature_layer", ValueType::Int, "2", "tapped synthesis layer k", 0, 5},
        {"gen.samples", ValueType::Int, "32", "ray samples", 2, 512},
        {"gen.steps", ValueType::Int, "3000", "auto-decoding steps", 0},
        {"gen.batch", ValueType::Int, "8", "auto-decoding batch", 1, 256},
        {"gen.lr", ValueType::Real, "0.002", "generator learning rate", 0},
        {"gen.latent_lr", ValueType::Real, "0.01", "latent learning rate", 0},
        {"gen.seed", ValueType::Int, "0", "generator seed", 0},

        {"invert.latent_steps", ValueType::Int, "3000", "encoder steps on latent loss only", 0},
        {"invert.image_steps", ValueType::Int, "300", "encoder steps with image loss", 0},
        {"invert.afa_steps", ValueType::Int, "600", "AFA steps", 0},
        {"invert.batch", ValueType::Int, "8", "inversion batch", 1, 256},
        {"invert.lr", ValueType::Real, "0.001", "inversion learning rate", 0},
        {"invert.seed", ValueType::Int, "0", "inversion seed", 0},

        {"relight.hidden", ValueType::Int, "256", "MLP width", 1, 8192},
        {"relight.layers", ValueType::Int, "14", "MLP depth", 2, 64},
        {"relight.lambda_lat", ValueType::Real, "10", "latent loss weight", 0},
        {"relight.lambda_c", ValueType::Real, "0.01", "L1 loss weight", 0},
        {"relight.lambda_lpips", ValueType::Real, "1", "perceptual loss weight", 0},
        {"relight.lr", ValueType::Real, "0.0003", "learning rate", 0},
        {"relight.batch", ValueType::Int, "8", "batch size", 1, 256},
        {"relight.steps", ValueType::Int, "2000", "iterations", 0},
        {"relight.seed", ValueType::Int, "0", "sampling seed", 0},
        {"relight.validate_every", ValueType::Int, "200", "validation interval", 1},
        {"relight.checkpoint_every", ValueType::Int, "100", "resume-state interval", 1},
        {"relight.views", ValueType::Int, "2", "training cameras, most frontal first", 1, 64},
        {"relight.feature_mode", ValueType::String, "manipulate", "manipulate | direct"},

        {"ablate.views", ValueType::IntList, "1, 2, 4, 8", "viewpoint counts"},
        {"ablate.subjects", ValueType::IntList, "20", "training subject counts"},
        {"eval.window", ValueType::Int, "9", "landmark search window, pixels", 1, 63},
        {"bench.frames", ValueType::Int, "20", "frames per timing", 1, 10000},
    };
}

io::KvConfig default_config() { return io::KvConfig(config_schema()); }

std::vector<int> Settings::train_cameras(int count) const {
    if (count < 1 || count > data.cameras)
        throw Error("view count " + std::to_string(count) + " outside [1, " + std::to_string(data.cameras) + "]",
                    ErrorKind::Config);
    const auto order = data.arc.frontal_order(data.cameras);
    return {order.begin(), order.begin() + count};
}

Settings settings_from(const io::KvConfig& c) {
    Settings s;
    auto i = [&](const char* k) { return static_cast<int>(c.get_int(k)); };
    s.data.subjects = i("data.subjects");
    s.data.cameras = i("data.cameras");
    s.data.lights = i("data.lights");
    s.data.envs = i("data.envs");
    s.data.resolution = i("data.resolution");
    s.data.seed = static_cast<std::uint64_t>(c.get_int("data.seed"));
    s.data.env_seed = static_cast<std::uint64_t>(c.get_int("data.env_seed"));
    s.data.holdout_subjects = i("data.holdout_subjects");
    s.data.holdout_envs = i("data.holdout_envs");
    s.data.arc.yaw_limit_deg = c.get_real("arc.yaw");
    s.data.arc.pitch_limit_deg = c.get_real("arc.pitch");
    if (s.data.holdout_subjects >= s.data.subjects)
        throw Error("data.holdout_subjects must leave training subjects", ErrorKind::Config);
    if (s.data.holdout_envs >= s.data.envs)
        throw Error("data.holdout_envs must leave training envs", ErrorKind::Config);

    s.generator.latent_layers = i("gen.latent_layers");
    s.generator.latent_dim = i("gen.latent_dim");
    s.generator.channels = i("gen.channels");
    s.generator.feature_layer = i("gen.feature_layer");
    s.generator.samples = i("gen.samples");
    s.generator.output_res = s.data.resolution;
    s.generator.render_res = s.data.resolution / 2;
    s.generator.arc = s.data.arc;
    try {
        s.generator.validate();
    } catch (const Error& e) {
        throw Error(e.what(), ErrorKind::Config);
    }
    s.pretrain.steps = i("gen.steps");
    s.pretrain.batch = i("gen.batch");
    s.pretrain.lr = c.get_real("gen.lr");
    s.pretrain.latent_lr = c.get_real("gen.latent_lr");
    s.pretrain.seed = static_cast<std::uint64_t>(c.get_int("gen.seed"));

    s.inversion.latent_steps = i("invert.latent_steps");
    s.inversion.image_steps = i("invert.image_steps");
    s.inversion.afa_steps = i("invert.afa_steps");
    s.inversion.batch = i("invert.batch");
    s.inversion.lr = c.get_real("invert.lr");
    s.inversion.seed = static_cast<std::uint64_t>(c.get_int("invert.seed"));

    s.relighter.lights = s.data.lights;
    s.relighter.hidden = i("relight.hidden");
    s.relighter.layers = i("relight.layers");
    s.relight.weights = {c.get_real("relight.lambda_lat"), c.get_real("relight.lambda_c"),
                         c.get_real("relight.lambda_lpips")};
    s.relight.lr = c.get_real("relight.lr");
    s.relight.batch = i("relight.batch");
    s.relight.steps = i("relight.steps");
    s.relight.seed = static_cast<std::uint64_t>(c.get_int("relight.seed"));
    s.relight.validate_every = i("relight.validate_every");
    s.relight.checkpoint_every = i("relight.checkpoint_every");
    s.views = i("relight.views");
    try {
        s.mode = relight::feature_mode_from_string(c.get_string("relight.feature_mode"));
    } catch (const Error& e) {
        throw Error(std::string("relight.feature_mode: ") + e.what(), ErrorKind::Config);
    }
    s.train_cameras();

    for (long v : c.get_int_list("ablate.views")) s.ablate_views.push_back(static_cast<int>(v));
    for (long v : c.get_int_list("ablate.subjects")) {
        if (v < 1 || v > s.data.subjects - s.data.holdout_subjects)
            throw Error("ablate.subjects entry " + std::to_string(v) + " exceeds the training subjects",
                        ErrorKind::Config);
        s.ablate_subjects.push_back(static_cast<int>(v));
    }
    for (int v : s.ablate_views) s.train_cameras(v);
    s.eval_window = i("eval.window");
    s.bench_frames = i("bench.frames");
    s.hash = c.hash();
    s.text = c.to_text();
    return s;
}

}  // namespace relit::pipeline
