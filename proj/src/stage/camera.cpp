// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/stage/camera.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace relit::stage {
namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> CameraPose::ray(int px, int py) const {
    const Eigen::Vector3d d_cam((px + 0.5 - cx) / fx, (py + 0.5 - cy) / fy, 1.0);
    return {center(), (rotation.transpose() * d_cam).normalized()};
}

CameraPose CameraPose::resized(int w, int h) const {
    CameraPose p = *this;
    const double sx = static_cast<double>(w) / width;
    const double sy = static_cast<double>(h) / height;
    p.fx *= sx;
    p.cx *= sx;
    p.fy *= sy;
    p.cy *= sy;
    p.width = w;
    p.height = h;
    return p;
}

double CameraPose::yaw_deg() const {
    const Eigen::Vector3d c = center();
    return std::atan2(c.x(), c.z()) / kDeg;
}

double CameraPose::pitch_deg() const {
    const Eigen::Vector3d c = center();
    return std::asin(std::clamp(c.y() / c.norm(), -1.0, 1.0)) / kDeg;
}

CameraPose CameraPose::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
                               double focal_px, int width, int height) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    const Eigen::Vector3d right = forward.cross(up).normalized();
    const Eigen::Vector3d down = forward.cross(right);
    CameraPose p;
    p.rotation.row(0) = right.transpose();
    p.rotation.row(1) = down.transpose();
    p.rotation.row(2) = forward.transpose();
    p.translation = -p.rotation * eye;
    p.fx = p.fy = focal_px;
    p.cx = width / 2.0;
    p.cy = height / 2.0;
    p.width = width;
    p.height = height;
    return p;
}

CameraPose CameraPose::orbit(double yaw_deg, double pitch_deg, double distance, double focal_px, int width,
                             int height) {
    const double yaw = yaw_deg * kDeg;
    const double pitch = pitch_deg * kDeg;
    const Eigen::Vector3d eye(distance * std::sin(yaw) * std::cos(pitch), distance * std::sin(pitch),
                              distance * std::cos(yaw) * std::cos(pitch));
    return look_at(eye, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitY(), focal_px, width, height);
}

Projection project(const CameraPose& pose, const Eigen::Vector3d& world) {
    const Eigen::Vector3d c = pose.to_camera(world);
    Projection out;
    if (c.z() <= 1e-9) return out;
    out.valid = true;
    out.pixel = {pose.fx * c.x() / c.z() + pose.cx, pose.fy * c.y() / c.z() + pose.cy};
    out.inside = out.pixel.x() >= 0 && out.pixel.y() >= 0 && out.pixel.x() < pose.width && out.pixel.y() < pose.height;
    return out;
}

double CameraArc::focal_px(int width) const { return 0.5 * width / std::tan(0.5 * fov_deg * kDeg); }

CameraPose CameraArc::pose(double yaw, double pitch, int width, int height) const {
    return CameraPose::orbit(yaw, pitch, distance, focal_px(width), width, height);
}

std::vector<CameraPose> CameraArc::cameras(int count, int width, int height) const {
    std::vector<CameraPose> out;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
        const double yaw = -yaw_limit_deg + 2.0 * yaw_limit_deg * t;
        const double pitch = count == 1 ? 0.0 : (i % 2 == 0 ? pitch_limit_deg : -pitch_limit_deg);
        out.push_back(pose(yaw, pitch, width, height));
    }
    return out;
}

std::vector<int> CameraArc::frontal_order(int count) const {
    std::vector<int> idx(static_cast<std::size_t>(count));
    std::iota(idx.begin(), idx.end(), 0);
    const auto cams = cameras(count, 8, 8);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(cams[static_cast<std::size_t>(a)].yaw_deg()) <
               std::abs(cams[static_cast<std::size_t>(b)].yaw_deg()) - 1e-9;
    });
    return idx;
}

bool CameraArc::contains(double yaw, double pitch, double tol) const {
    return std::abs(yaw) <= yaw_limit_deg + tol && std::abs(pitch) <= pitch_limit_deg + tol;
}

}  // namespace relit::stage
