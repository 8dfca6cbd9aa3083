// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/illum/envmap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "relit/core/error.hpp"
#include "relit/io/image_io.hpp"

namespace relit::illum {
namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::Vector3d texel_direction(int u, int v, int width, int height) {
    const double theta = kPi * (v + 0.5) / height;
    const double phi = 2.0 * kPi * (u + 0.5) / width - kPi;
    return {std::sin(theta) * std::sin(phi), std::cos(theta), std::sin(theta) * std::cos(phi)};
}

Eigen::Vector2d direction_to_texel(const Eigen::Vector3d& dir, int width, int height) {
    const Eigen::Vector3d d = dir.normalized();
    const double theta = std::acos(std::clamp(d.y(), -1.0, 1.0));
    const double phi = std::atan2(d.x(), d.z());
    return {(phi + kPi) / (2.0 * kPi) * width - 0.5, theta / kPi * height - 0.5};
}

Rgb EnvMap::sample(const Eigen::Vector3d& dir) const {
    const int w = width(), h = height();
    const Eigen::Vector2d t = direction_to_texel(dir, w, h);
    const double x = t.x();
    const double y = std::clamp(t.y(), 0.0, static_cast<double>(h - 1));
    const double fx = std::floor(x), fy = std::floor(y);
    const double ax = x - fx, ay = y - fy;
    const int x0 = ((static_cast<int>(fx) % w) + w) % w;
    const int x1 = (x0 + 1) % w;
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    Rgb out{};
    for (int c = 0; c < 3; ++c) {
        const double top = (1 - ax) * pixels.at(x0, y0, c) + ax * pixels.at(x1, y0, c);
        const double bot = (1 - ax) * pixels.at(x0, y1, c) + ax * pixels.at(x1, y1, c);
        out[static_cast<std::size_t>(c)] = static_cast<float>((1 - ay) * top + ay * bot);
    }
    return out;
}

EnvMap EnvMap::rotated_columns(int columns) const {
    EnvMap out = *this;
    const int w = width();
    for (int v = 0; v < height(); ++v)
        for (int u = 0; u < w; ++u) {
            const int src = (((u - columns) % w) + w) % w;
            for (int c = 0; c < 3; ++c) out.pixels.at(u, v, c) = pixels.at(src, v, c);
        }
    return out;
}

void validate(const EnvMap& env) {
    if (env.pixels.empty() || env.width() != 2 * env.height())
        throw Error("environment map '" + env.name + "' must be lat-long with width == 2*height, got " +
                    std::to_string(env.width()) + "x" + std::to_string(env.height()));
    for (int y = 0; y < env.height(); ++y)
        for (int x = 0; x < env.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                const float v = env.pixels.at(x, y, c);
                if (!std::isfinite(v) || v < 0.0f)
                    throw Error("environment map '" + env.name + "' has invalid value " + std::to_string(v) +
                                " at pixel (" + std::to_string(x) + ", " + std::to_string(y) + ")");
            }
}

EnvMap load_envmap(const std::filesystem::path& path) {
    EnvMap env;
    env.name = path.stem().string();
    env.source_tag = path.string();
    const std::string ext = path.extension().string();
    if (ext == ".hdr") {
        env.pixels = io::read_rgbe(path);
    } else if (ext == ".exr") {
        env.pixels = io::read_exr(path);
    } else if (ext == ".png") {
        env.pixels = io::read_png(path);
        for (float& v : env.pixels.data) v = std::pow(v, 2.2f);
        env.ldr_source = true;
    } else {
        throw Error("unsupported environment map format: " + path.string());
    }
    validate(env);
    return env;
}

void save_envmap(const std::filesystem::path& path, const EnvMap& env) {
    validate(env);
    const std::string ext = path.extension().string();
    if (ext == ".hdr")
        io::write_rgbe(path, env.pixels);
    else if (ext == ".exr")
        io::write_exr(path, env.pixels);
    else
        throw Error("unsupported environment map format: " + path.string());
}

}  // namespace relit::illum
