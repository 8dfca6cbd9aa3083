// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/stage/renderer.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <optional>

#include "relit/core/error.hpp"

namespace relit::stage {
namespace {

constexpr int kMarchSteps = 192;
constexpr int kBisectSteps = 48;

std::optional<std::pair<double, double>> sphere_span(const Eigen::Vector3d& o, const Eigen::Vector3d& d, double r) {
    const double b = o.dot(d);
    const double c = o.squaredNorm() - r * r;
    const double disc = b * b - c;
    if (disc < 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double t0 = std::max(0.0, -b - sq);
    const double t1 = -b + sq;
    if (t1 < 0) return std::nullopt;
    return std::make_pair(t0, t1);
}

std::optional<double> intersect_head(const Superellipsoid& head, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                                     double t0, double t1) {
    const double dt = (t1 - t0) / kMarchSteps;
    double prev_t = t0;
    double prev_v = head.level(o + d * t0);
    if (prev_v <= 0) return t0;
    for (int i = 1; i <= kMarchSteps; ++i) {
        const double t = t0 + dt * i;
        const double v = head.level(o + d * t);
        if (v <= 0) {
            double lo = prev_t, hi = t;
            for (int k = 0; k < kBisectSteps; ++k) {
                const double mid = 0.5 * (lo + hi);
                if (head.level(o + d * mid) > 0)
                    lo = mid;
                else
                    hi = mid;
            }
            return hi;
        }
        prev_t = t;
        prev_v = v;
    }
    return std::nullopt;
}

void check_weights(const LightRig& rig, std::span<const Rgb> weights) {
    if (static_cast<int>(weights.size()) != rig.size())
        throw Error("render_direct: " + std::to_string(weights.size()) + " weights for a rig of " +
                    std::to_string(rig.size()) + " lights");
    for (const auto& w : weights)
        for (float c : w)
            if (!(c >= 0.0f)) throw Error("render_direct: light weights must be non-negative");
}

}  // namespace

GBuffer trace(const SyntheticSubject& subject, const CameraPose& pose) {
    GBuffer g;
    g.width = pose.width;
    g.height = pose.height;
    g.hits.resize(static_cast<std::size_t>(pose.width) * pose.height);
    g.specular_strength = static_cast<float>(subject.specular.strength);
    g.specular_exponent = static_cast<float>(subject.specular.exponent);
    const double head_r = subject.head.semi_axes.norm();
    const double bound_r = subject.bounding_radius();

    for (int y = 0; y < pose.height; ++y) {
        for (int x = 0; x < pose.width; ++x) {
            const auto [o, d] = pose.ray(x, y);
            if (!sphere_span(o, d, bound_r)) continue;
            g.empty = false;

            double best_t = INFINITY;
            int best = -1;  // -1 none, 0 head, 1+ feature index
            if (auto span = sphere_span(o, d, head_r)) {
                if (auto t = intersect_head(subject.head, o, d, span->first, span->second)) {
                    best_t = *t;
                    best = 0;
                }
            }
            for (std::size_t f = 0; f < subject.features.size(); ++f) {
                if (auto t = subject.features[f].intersect(o, d); t && *t < best_t) {
                    best_t = *t;
                    best = static_cast<int>(f) + 1;
                }
            }
            if (best < 0) continue;

            const Eigen::Vector3d p = o + d * best_t;
            Eigen::Vector3d n, albedo;
            if (best == 0) {
                n = subject.head.normal(p);
                albedo = subject.head_albedo(p);
            } else {
                const auto& f = subject.features[static_cast<std::size_t>(best - 1)];
                n = f.normal(p);
                albedo = f.albedo.isZero() ? subject.head_albedo(p) : f.albedo;
            }
            SurfaceHit& h = g.hits[static_cast<std::size_t>(y) * pose.width + x];
            h.hit = true;
            h.position = p.cast<float>();
            h.normal = n.cast<float>();
            h.to_eye = (-d).cast<float>();
            h.albedo = albedo.cast<float>();
        }
    }
    return g;
}

Eigen::Vector3f shade(const SurfaceHit& hit, const Eigen::Vector3f& l, float spec_strength, float spec_exp) {
    const float nl = hit.normal.dot(l);
    if (!(nl > 0.0f)) return Eigen::Vector3f::Zero();
    const Eigen::Vector3f h = (l + hit.to_eye).normalized();
    const float nh = std::max(0.0f, hit.normal.dot(h));
    const float spec = spec_strength * std::pow(nh, spec_exp);
    const float diffuse = nl * std::numbers::inv_pi_v<float>;
    return ((hit.albedo * diffuse).array() + spec).matrix();
}

RenderResult render_olat(const GBuffer& g, int light_index, const LightRig& rig) {
    if (light_index < 0 || light_index >= rig.size())
        throw Error("render_olat: light index " + std::to_string(light_index) + " outside rig of " +
                    std::to_string(rig.size()));
    RenderResult out{Image(g.width, g.height), g.empty};
    const Eigen::Vector3f l = rig.directions[static_cast<std::size_t>(light_index)].cast<float>();
    const float intensity = static_cast<float>(rig.intensities[static_cast<std::size_t>(light_index)]);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            const auto& h = g.at(x, y);
            if (!h.hit) continue;
            const Eigen::Vector3f r = shade(h, l, g.specular_strength, g.specular_exponent);
            for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = intensity * r[c];
        }
    return out;
}

RenderResult render_olat(const SyntheticSubject& subject, const CameraPose& pose, int light_index,
                         const LightRig& rig) {
    return render_olat(trace(subject, pose), light_index, rig);
}

RenderResult render_direct(const GBuffer& g, const LightRig& rig, std::span<const Rgb> weights) {
    check_weights(rig, weights);
    RenderResult out{Image(g.width, g.height), g.empty};
    std::vector<Eigen::Vector3f> dirs;
    for (const auto& d : rig.directions) dirs.push_back(d.cast<float>());
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            const auto& h = g.at(x, y);
            if (!h.hit) continue;
            auto px = out.image.pixel(x, y);
            for (int i = 0; i < rig.size(); ++i) {
                const auto ui = static_cast<std::size_t>(i);
                const Eigen::Vector3f r = shade(h, dirs[ui], g.specular_strength, g.specular_exponent);
                const float intensity = static_cast<float>(rig.intensities[ui]);
                for (int c = 0; c < 3; ++c) px[c] += weights[ui][c] * (intensity * r[c]);
            }
        }
    return out;
}

RenderResult render_direct(const SyntheticSubject& subject, const CameraPose& pose, const LightRig& rig,
                           std::span<const Rgb> weights) {
    check_weights(rig, weights);
    return render_direct(trace(subject, pose), rig, weights);
}

}  // namespace relit::stage
