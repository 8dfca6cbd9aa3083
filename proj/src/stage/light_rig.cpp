// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/stage/light_rig.hpp"

#include <cmath>
#include <numbers>

#include "relit/core/error.hpp"

namespace relit::stage {

LightRig LightRig::fibonacci(int n) {
    if (n <= 0) throw Error("light rig needs at least one light");
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    LightRig rig;
    for (int i = 0; i < n; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double phi = golden * i;
        rig.directions.emplace_back(Eigen::Vector3d(r * std::sin(phi), y, r * std::cos(phi)).normalized());
        rig.intensities.push_back(1.0);
    }
    return rig;
}

LightRig LightRig::rotated_yaw(double yaw_rad) const {
    LightRig out = *this;
    const double c = std::cos(yaw_rad), s = std::sin(yaw_rad);
    for (auto& d : out.directions) d = Eigen::Vector3d(c * d.x() + s * d.z(), d.y(), -s * d.x() + c * d.z());
    return out;
}

}  // namespace relit::stage
