// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace relit::stage {

/// Superellipsoid with y as the polar axis. `e_polar` shapes vertical
/// profiles, `e_azimuth` horizontal cross-sections; both < 1 give boxier
/// shapes, 1 is an ellipsoid.
struct Superellipsoid {
    Eigen::Vector3d semi_axes{1.0, 1.0, 1.0};
    double e_polar = 1.0;
    double e_azimuth = 1.0;

    /// Inside-outside function, homogeneous of degree 2/e_polar; 1 on the surface.
    double inside_outside(const Eigen::Vector3d& p) const;
    /// Radial level function F^(e_polar/2) - 1: negative inside, zero on the
    /// surface, and equal to r/r_surface(d) - 1 along any ray from the origin.
    double level(const Eigen::Vector3d& p) const;
    /// Distance from the origin to the surface along unit direction d.
    double surface_radius(const Eigen::Vector3d& d) const;
    Eigen::Vector3d normal(const Eigen::Vector3d& p) const;

    bool operator==(const Superellipsoid&) const = default;
};

/// Axis-aligned ellipsoid facial primitive.
struct Ellipsoid {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d semi_axes{1.0, 1.0, 1.0};
    Eigen::Vector3d albedo{0.5, 0.5, 0.5};

    double level(const Eigen::Vector3d& p) const;
    Eigen::Vector3d normal(const Eigen::Vector3d& p) const;
    /// Smallest t >= 0 where the ray enters the ellipsoid.
    std::optional<double> intersect(const Eigen::Vector3d& o, const Eigen::Vector3d& d) const;

    bool operator==(const Ellipsoid&) const = default;
};

struct AlbedoParams {
    std::uint64_t texture_seed = 0;
    Eigen::Vector3d skin_rgb{0.6, 0.45, 0.35};
    Eigen::Vector3d hair_rgb{0.1, 0.08, 0.06};
    double hairline = 0.55;  ///< hair where the normalized y exceeds this
    std::array<Eigen::Vector3d, 3> wave_dirs{};
    std::array<double, 3> wave_phase{};
    double texture_amplitude = 0.1;

    bool operator==(const AlbedoParams&) const = default;
};

struct SpecularParams {
    double strength = 0.15;  ///< in [0,1]
    double exponent = 24.0;  ///< in [1,256]

    bool operator==(const SpecularParams&) const = default;
};

enum class Feature : int { LeftEye = 0, RightEye, Nose, Mouth };
inline constexpr int kFeatureCount = 4;
inline constexpr int kKeypointCount = 12;

std::string_view keypoint_name(int index);

struct SyntheticSubject {
    std::uint64_t subject_id = 0;
    Superellipsoid head;
    std::array<Ellipsoid, kFeatureCount> features{};
    AlbedoParams albedo;
    SpecularParams specular;
    std::array<Eigen::Vector3d, kKeypointCount> keypoints3d{};

    /// Union level function over head and features (<= 0 inside).
    double level(const Eigen::Vector3d& p) const;
    /// Skin or hair albedo of the head surface at p.
    Eigen::Vector3d head_albedo(const Eigen::Vector3d& p) const;
    /// Radius of a sphere around the origin that contains the whole subject.
    double bounding_radius() const;

    bool operator==(const SyntheticSubject&) const = default;
};

/// Pure function of the seed.
SyntheticSubject generate_subject(std::uint64_t seed);

}  // namespace relit::stage
