// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <vector>

namespace relit::stage {

/// Directional lights on a Fibonacci sphere. directions[i] points from the
/// subject toward light i.
struct LightRig {
    std::vector<Eigen::Vector3d> directions;
    std::vector<double> intensities;

    int size() const { return static_cast<int>(directions.size()); }

    static LightRig fibonacci(int n);
    /// Rig rotated about +y by `yaw_rad` (same sense as CameraPose::orbit).
    LightRig rotated_yaw(double yaw_rad) const;
};

}  // namespace relit::stage
