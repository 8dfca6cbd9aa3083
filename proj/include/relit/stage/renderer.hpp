// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

#include "relit/core/image.hpp"
#include "relit/stage/camera.hpp"
#include "relit/stage/light_rig.hpp"
#include "relit/stage/subject.hpp"

namespace relit::stage {

/// Per-pixel first-hit surface attributes. Light independent, so one trace
/// serves every light of the rig.
struct SurfaceHit {
    bool hit = false;
    Eigen::Vector3f position = Eigen::Vector3f::Zero();
    Eigen::Vector3f normal = Eigen::Vector3f::Zero();
    Eigen::Vector3f to_eye = Eigen::Vector3f::Zero();
    Eigen::Vector3f albedo = Eigen::Vector3f::Zero();
};

struct GBuffer {
    int width = 0, height = 0;
    std::vector<SurfaceHit> hits;
    float specular_strength = 0.0f;
    float specular_exponent = 1.0f;
    /// No camera ray reached the subject's bounding sphere.
    bool empty = true;

    const SurfaceHit& at(int x, int y) const { return hits[static_cast<std::size_t>(y) * width + x]; }
};

struct RenderResult {
    Image image;
    bool empty_warning = false;
};

GBuffer trace(const SyntheticSubject& subject, const CameraPose& pose);

/// Radiance of one hit under a unit directional light: Lambert + Blinn-Phong,
/// no shadows. Zero when the light is behind the surface.
Eigen::Vector3f shade(const SurfaceHit& hit, const Eigen::Vector3f& light_dir, float spec_strength, float spec_exp);

RenderResult render_olat(const SyntheticSubject& subject, const CameraPose& pose, int light_index,
                         const LightRig& rig);
RenderResult render_olat(const GBuffer& gbuffer, int light_index, const LightRig& rig);

/// One-pass render under every light scaled by its RGB weight.
/// Weights must be non-negative and match the rig size.
RenderResult render_direct(const SyntheticSubject& subject, const CameraPose& pose, const LightRig& rig,
                           std::span<const Rgb> weights);
RenderResult render_direct(const GBuffer& gbuffer, const LightRig& rig, std::span<const Rgb> weights);

}  // namespace relit::stage
