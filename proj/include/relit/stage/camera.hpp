// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace relit::stage {

/// Pinhole camera. Camera frame is x right, y down, z forward; world is
/// y up with subjects facing +z.
struct CameraPose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  ///< world -> camera
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    Eigen::Vector3d center() const { return -rotation.transpose() * translation; }
    Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const { return rotation * world + translation; }

    /// Ray through the center of pixel (px, py): origin and unit world direction.
    std::pair<Eigen::Vector3d, Eigen::Vector3d> ray(int px, int py) const;

    /// Same extrinsics, intrinsics rescaled to a new image size.
    CameraPose resized(int w, int h) const;

    /// Orbit angles of the camera center around the origin, in degrees.
    double yaw_deg() const;
    double pitch_deg() const;

    static CameraPose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
                              double focal_px, int width, int height);
    /// Camera on a sphere of radius `distance` looking at the origin;
    /// yaw rotates toward +x, pitch toward +y.
    static CameraPose orbit(double yaw_deg, double pitch_deg, double distance, double focal_px, int width,
                            int height);

    bool operator==(const CameraPose&) const = default;
};

struct Projection {
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
    bool valid = false;   ///< false when the point is behind the camera
    bool inside = false;  ///< within the image bounds
};

Projection project(const CameraPose& pose, const Eigen::Vector3d& world);

/// Calibrated capture arc shared by every stage of the pipeline.
struct CameraArc {
    double yaw_limit_deg = 45.0;
    double pitch_limit_deg = 15.0;
    double distance = 4.5;
    double fov_deg = 30.0;

    double focal_px(int width) const;
    CameraPose pose(double yaw_deg, double pitch_deg, int width, int height) const;
    /// `count` cameras spread over yaw in [-limit, limit] with alternating pitch.
    std::vector<CameraPose> cameras(int count, int width, int height) const;
    /// Arc cameras ordered by how frontal they are (smallest |yaw| first).
    std::vector<int> frontal_order(int count) const;
    bool contains(double yaw_deg, double pitch_deg, double tol = 1e-6) const;
};

}  // namespace relit::stage
