// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace relit {

/// Row-major RGB float image. Radiance images are linear and unbounded;
/// LDR images hold display values in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

    std::size_t index(int x, int y) const {
        return (static_cast<std::size_t>(y) * width + x) * 3;
    }
    float& at(int x, int y, int c) { return data[index(x, y) + c]; }
    float at(int x, int y, int c) const { return data[index(x, y) + c]; }

    std::span<float, 3> pixel(int x, int y) {
        return std::span<float, 3>(data.data() + index(x, y), 3);
    }
    std::span<const float, 3> pixel(int x, int y) const {
        return std::span<const float, 3>(data.data() + index(x, y), 3);
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool empty() const { return data.empty(); }
    bool same_shape(const Image& o) const { return width == o.width && height == o.height; }

    bool operator==(const Image&) const = default;
};

using Rgb = std::array<float, 3>;

/// Rec. 709 luminance weights, used for exposure anchoring.
inline constexpr Rgb kLuminance709 = {0.2126f, 0.7152f, 0.0722f};

inline float luminance(std::span<const float, 3> p) {
    return kLuminance709[0] * p[0] + kLuminance709[1] * p[1] + kLuminance709[2] * p[2];
}

bool all_finite(const Image& img);
float max_abs(const Image& img);
/// max |a - b| / max |b|; 0 when both are identically zero.
double max_relative_error(const Image& a, const Image& b);
Image scaled(const Image& img, float s);

}  // namespace relit
