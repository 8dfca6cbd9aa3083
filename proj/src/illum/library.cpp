// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/illum/library.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "relit/core/error.hpp"
#include "relit/core/rng.hpp"

namespace relit::illum {
namespace {

Eigen::Vector3d hue_color(double hue, double saturation) {
    const double h = hue * 6.0;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    Eigen::Vector3d rgb;
    switch (static_cast<int>(h) % 6) {
        case 0: rgb = {1, x, 0}; break;
        case 1: rgb = {x, 1, 0}; break;
        case 2: rgb = {0, 1, x}; break;
        case 3: rgb = {0, x, 1}; break;
        case 4: rgb = {x, 0, 1}; break;
        default: rgb = {1, 0, x}; break;
    }
    return (1.0 - saturation) * Eigen::Vector3d::Ones() + saturation * rgb;
}

std::string env_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "env%02d", index);
    return buf;
}

}  // namespace

EnvMap procedural_envmap(int index, std::uint64_t seed, int height) {
    SplitMix64 rng(seed ^ (0xe11f0000ULL + static_cast<std::uint64_t>(index) * 0x9e3779b97f4a7c15ULL));
    EnvMap env;
    env.name = env_name(index);
    env.source_tag = "procedural";
    env.pixels = Image(2 * height, height);

    const Eigen::Vector3d ambient = hue_color(rng.uniform(), rng.uniform(0.0, 0.5)) * rng.uniform(0.03, 0.12);
    struct Lobe {
        Eigen::Vector3d dir, color;
        double sharpness;
    };
    std::vector<Lobe> lobes;
    const int lobe_count = 1 + static_cast<int>(rng.below(2));
    for (int k = 0; k < lobe_count; ++k) {
        const double az = rng.uniform(-0.75, 0.75) * std::numbers::pi;
        const double el = rng.uniform(-0.2, 0.9);
        const Eigen::Vector3d dir(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
        const double power = k == 0 ? rng.uniform(4.0, 10.0) : rng.uniform(1.0, 4.0);
        lobes.push_back({dir, hue_color(rng.uniform(), rng.uniform(0.1, 0.8)) * power, rng.uniform(4.0, 16.0)});
    }

    for (int v = 0; v < height; ++v)
        for (int u = 0; u < 2 * height; ++u) {
            const Eigen::Vector3d d = texel_direction(u, v, 2 * height, height);
            Eigen::Vector3d rad = ambient * (0.6 + 0.4 * std::max(0.0, d.y()));
            for (const auto& l : lobes) rad += l.color * std::exp(l.sharpness * (d.dot(l.dir) - 1.0));
            for (int c = 0; c < 3; ++c) env.pixels.at(u, v, c) = static_cast<float>(rad[c]);
        }
    return env;
}

std::vector<EnvMap> ensure_library(const std::filesystem::path& dir, int count, std::uint64_t seed) {
    std::vector<EnvMap> out;
    for (int i = 0; i < count; ++i) {
        const auto path = dir / (env_name(i) + ".hdr");
        if (!std::filesystem::exists(path)) save_envmap(path, procedural_envmap(i, seed));
        out.push_back(load_envmap(path));
    }
    return out;
}

std::vector<EnvMap> load_library(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir)) throw Error("environment map directory not found: " + dir.string());
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const auto ext = e.path().extension().string();
        if (ext == ".hdr" || ext == ".exr") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<EnvMap> out;
    for (const auto& f : files) out.push_back(load_envmap(f));
    return out;
}

}  // namespace relit::illum
