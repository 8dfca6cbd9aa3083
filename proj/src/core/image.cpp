// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/core/image.hpp"

#include <algorithm>
#include <cmath>

#include "relit/core/error.hpp"

namespace relit {

bool all_finite(const Image& img) {
    return std::all_of(img.data.begin(), img.data.end(), [](float v) { return std::isfinite(v); });
}

float max_abs(const Image& img) {
    float m = 0.0f;
    for (float v : img.data) m = std::max(m, std::abs(v));
    return m;
}

double max_relative_error(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw Error("max_relative_error: shape mismatch");
    double diff = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        diff = std::max(diff, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
    const double ref = max_abs(b);
    if (ref == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
    return diff / ref;
}

Image scaled(const Image& img, float s) {
    Image out = img;
    for (float& v : out.data) v *= s;
    return out;
}

}  // namespace relit
