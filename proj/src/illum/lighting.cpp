// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/illum/lighting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "relit/core/error.hpp"
#include "relit/io/image_io.hpp"

namespace relit::illum {

std::vector<float> LightWeights::flattened() const {
    std::vector<float> out;
    out.reserve(weights.size() * 3);
    for (const auto& w : weights) out.insert(out.end(), w.begin(), w.end());
    return out;
}

double LightWeights::mean_luminance() const {
    if (weights.empty()) return 0.0;
    double s = 0.0;
    for (const auto& w : weights) s += luminance(w);
    return s / static_cast<double>(weights.size());
}

LightWeights LightWeights::operator+(const LightWeights& o) const {
    if (o.size() != size()) throw Error("light weight size mismatch");
    LightWeights out = *this;
    for (std::size_t i = 0; i < weights.size(); ++i)
        for (std::size_t c = 0; c < 3; ++c) out.weights[i][c] += o.weights[i][c];
    return out;
}

LightWeights LightWeights::operator*(float s) const {
    LightWeights out = *this;
    for (auto& w : out.weights)
        for (float& c : w) c *= s;
    return out;
}

double cell_solid_angle(int light_count) { return 4.0 * std::numbers::pi / light_count; }

LightWeights downsample_to_weights(const EnvMap& env, const stage::LightRig& rig) {
    LightWeights out;
    out.env_name = env.name;
    const double omega = cell_solid_angle(rig.size());
    for (const auto& d : rig.directions) {
        const Rgb s = env.sample(d);
        out.weights.push_back({static_cast<float>(s[0] * omega), static_cast<float>(s[1] * omega),
                               static_cast<float>(s[2] * omega)});
    }
    return out;
}

Image relight_ibr(std::span<const Image> olat, const LightWeights& weights) {
    if (static_cast<int>(olat.size()) != weights.size())
        throw Error("relight_ibr: stack has " + std::to_string(olat.size()) + " OLAT images but " +
                    std::to_string(weights.size()) + " light weights");
    if (olat.empty()) throw Error("relight_ibr: empty OLAT stack");
    Image out(olat[0].width, olat[0].height);
    for (const auto& img : olat)
        if (!img.same_shape(out)) throw Error("relight_ibr: OLAT images differ in size");
    const std::size_t n = out.pixel_count();
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t i = 0; i < olat.size(); ++i)
            for (std::size_t c = 0; c < 3; ++c) out.data[p * 3 + c] += weights.weights[i][c] * olat[i].data[p * 3 + c];
    return out;
}

void save_weights(const std::filesystem::path& path, const LightWeights& w) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& rgb : w.weights) j.push_back({rgb[0], rgb[1], rgb[2]});
    const std::string text = j.dump();
    io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

LightWeights load_weights(const std::filesystem::path& path, const std::string& env_name) {
    const auto bytes = io::read_file(path);
    LightWeights w;
    w.env_name = env_name;
    try {
        const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
        for (const auto& e : j) w.weights.push_back({e.at(0).get<float>(), e.at(1).get<float>(), e.at(2).get<float>()});
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string(), e.what());
    }
    return w;
}

float auto_exposure_scale(std::span<const Image> radiance, float target) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& img : radiance)
        for (std::size_t p = 0; p < img.pixel_count(); ++p) {
            const float* px = img.data.data() + p * 3;
            if (px[0] == 0.0f && px[1] == 0.0f && px[2] == 0.0f) continue;
            sum += luminance(std::span<const float, 3>(px, 3));
            ++count;
        }
    if (count == 0 || sum <= 0.0) return 1.0f;
    return static_cast<float>(target / (sum / static_cast<double>(count)));
}

ToneMapped tonemap(const Image& radiance, const ExposurePolicy& policy) {
    ToneMapped out;
    out.scale = policy.mode == ExposureMode::Fixed
                    ? policy.fixed_scale
                    : auto_exposure_scale(std::span<const Image>(&radiance, 1), policy.target_mean_luminance);
    out.ldr = Image(radiance.width, radiance.height);
    const float inv_gamma = 1.0f / policy.gamma;
    for (std::size_t i = 0; i < radiance.data.size(); ++i) {
        const float v = std::clamp(radiance.data[i] * out.scale, 0.0f, 1.0f);
        out.ldr.data[i] = std::pow(v, inv_gamma);
    }
    return out;
}

}  // namespace relit::illum
