// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/stage/subject.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "relit/core/rng.hpp"

namespace relit::stage {
namespace {

constexpr std::array<std::string_view, kKeypointCount> kKeypointNames = {
    "left_eye", "right_eye", "nose_tip", "nose_bridge", "mouth_left", "mouth_right",
    "mouth_center", "chin", "forehead", "left_cheek", "right_cheek", "left_temple"};

double spow(double v, double e) { return std::pow(std::abs(v), e); }

}  // namespace

std::string_view keypoint_name(int index) { return kKeypointNames.at(static_cast<std::size_t>(index)); }

double Superellipsoid::inside_outside(const Eigen::Vector3d& p) const {
    const double x = p.x() / semi_axes.x(), y = p.y() / semi_axes.y(), z = p.z() / semi_axes.z();
    const double horiz = spow(x, 2.0 / e_azimuth) + spow(z, 2.0 / e_azimuth);
    return std::pow(horiz, e_azimuth / e_polar) + spow(y, 2.0 / e_polar);
}

double Superellipsoid::level(const Eigen::Vector3d& p) const {
    return std::pow(inside_outside(p), e_polar / 2.0) - 1.0;
}

double Superellipsoid::surface_radius(const Eigen::Vector3d& d) const {
    return std::pow(inside_outside(d), -e_polar / 2.0);
}

Eigen::Vector3d Superellipsoid::normal(const Eigen::Vector3d& p) const {
    const double ax = semi_axes.x(), ay = semi_axes.y(), az = semi_axes.z();
    const double x = p.x() / ax, y = p.y() / ay, z = p.z() / az;
    const double ea = 2.0 / e_azimuth, ep = 2.0 / e_polar;
    const double horiz = spow(x, ea) + spow(z, ea);
    // d/dx of horiz^(e_az/e_pol) = (e_az/e_pol) horiz^(e_az/e_pol - 1) * ea |x|^(ea-1) sign(x) / ax
    const double outer = horiz > 0 ? (e_azimuth / e_polar) * std::pow(horiz, e_azimuth / e_polar - 1.0) : 0.0;
    auto dpow = [](double v, double e) { return v == 0 ? 0.0 : e * std::pow(std::abs(v), e - 1.0) * (v > 0 ? 1 : -1); };
    Eigen::Vector3d g(outer * dpow(x, ea) / ax, dpow(y, ep) / ay, outer * dpow(z, ea) / az);
    const double n = g.norm();
    return n > 0 ? Eigen::Vector3d(g / n) : Eigen::Vector3d(p.normalized());
}

double Ellipsoid::level(const Eigen::Vector3d& p) const {
    return (p - center).cwiseQuotient(semi_axes).norm() - 1.0;
}

Eigen::Vector3d Ellipsoid::normal(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d q = (p - center).cwiseQuotient(semi_axes.cwiseProduct(semi_axes));
    return q.normalized();
}

std::optional<double> Ellipsoid::intersect(const Eigen::Vector3d& o, const Eigen::Vector3d& d) const {
    const Eigen::Vector3d oc = (o - center).cwiseQuotient(semi_axes);
    const Eigen::Vector3d dd = d.cwiseQuotient(semi_axes);
    const double a = dd.squaredNorm();
    const double b = 2.0 * oc.dot(dd);
    const double c = oc.squaredNorm() - 1.0;
    const double disc = b * b - 4 * a * c;
    if (disc < 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double t0 = (-b - sq) / (2 * a);
    const double t1 = (-b + sq) / (2 * a);
    if (t0 >= 0) return t0;
    if (t1 >= 0) return 0.0;
    return std::nullopt;
}

double SyntheticSubject::level(const Eigen::Vector3d& p) const {
    double v = head.level(p);
    for (const auto& f : features) v = std::min(v, f.level(p));
    return v;
}

Eigen::Vector3d SyntheticSubject::head_albedo(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d u = p.cwiseQuotient(head.semi_axes);
    // Hair covers the crown and the back of the head.
    const double hair_mask = std::clamp((u.y() - albedo.hairline) * 8.0 + 0.5, 0.0, 1.0);
    const double back_mask = std::clamp((-u.z() - 0.2) * 4.0, 0.0, 1.0);
    const double hair = std::max(hair_mask, back_mask);
    double tex = 0.0;
    for (std::size_t i = 0; i < albedo.wave_dirs.size(); ++i)
        tex += std::sin(albedo.wave_dirs[i].dot(p) + albedo.wave_phase[i]);
    const double mod = 1.0 + albedo.texture_amplitude * tex / 3.0;
    const Eigen::Vector3d base = (1.0 - hair) * albedo.skin_rgb + hair * albedo.hair_rgb;
    return (base * mod).cwiseMax(0.0).cwiseMin(1.0);
}

double SyntheticSubject::bounding_radius() const {
    // A superellipsoid with exponents <= 1 lies inside the box of its semi-axes.
    double r = head.semi_axes.norm();
    for (const auto& f : features) r = std::max(r, f.center.norm() + f.semi_axes.maxCoeff());
    return r;
}

SyntheticSubject generate_subject(std::uint64_t seed) {
    SplitMix64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x5eed);
    SyntheticSubject s;
    s.subject_id = seed;

    s.head.semi_axes = {rng.uniform(0.78, 0.92), rng.uniform(1.0, 1.15), rng.uniform(0.85, 0.98)};
    s.head.e_polar = rng.uniform(0.75, 1.0);
    s.head.e_azimuth = rng.uniform(0.8, 1.0);

    auto on_head = [&](double x, double y, double z) {
        const Eigen::Vector3d d = Eigen::Vector3d(x, y, z).normalized();
        return Eigen::Vector3d(d * s.head.surface_radius(d));
    };

    const double eye_sep = rng.uniform(0.27, 0.36);
    const double eye_h = rng.uniform(0.12, 0.22);
    const double eye_r = rng.uniform(0.09, 0.12);
    const Eigen::Vector3d eye_tint(rng.uniform(0.05, 0.25), rng.uniform(0.05, 0.2), rng.uniform(0.05, 0.25));
    for (int side : {0, 1}) {
        const double sx = side == 0 ? -1.0 : 1.0;  // left eye sits at -x (image left for a frontal camera)
        const Eigen::Vector3d surf = on_head(sx * eye_sep, eye_h, 0.85);
        Ellipsoid& e = s.features[static_cast<std::size_t>(side)];
        e.center = surf - Eigen::Vector3d(0, 0, 0.55 * eye_r);
        e.semi_axes = Eigen::Vector3d::Constant(eye_r);
        e.albedo = eye_tint;
    }

    {
        const double nose_len = rng.uniform(0.13, 0.2);
        const Eigen::Vector3d surf = on_head(0.0, rng.uniform(-0.12, -0.02), 1.0);
        Ellipsoid& n = s.features[static_cast<std::size_t>(Feature::Nose)];
        n.semi_axes = {rng.uniform(0.08, 0.12), rng.uniform(0.16, 0.22), nose_len};
        n.center = surf - Eigen::Vector3d(0, 0, 0.15 * nose_len);
        n.albedo = Eigen::Vector3d::Zero();  // uses skin albedo
    }
    {
        const Eigen::Vector3d surf = on_head(0.0, rng.uniform(-0.5, -0.38), 0.9);
        Ellipsoid& m = s.features[static_cast<std::size_t>(Feature::Mouth)];
        m.semi_axes = {rng.uniform(0.16, 0.24), rng.uniform(0.04, 0.06), 0.06};
        m.center = surf - Eigen::Vector3d(0, 0, 0.03);
        m.albedo = {rng.uniform(0.45, 0.7), rng.uniform(0.12, 0.25), rng.uniform(0.12, 0.25)};
    }

    s.albedo.texture_seed = rng.next();
    const double tone = rng.uniform(0.0, 1.0);
    s.albedo.skin_rgb = Eigen::Vector3d(0.85 - 0.45 * tone, 0.66 - 0.4 * tone, 0.55 - 0.38 * tone) +
                        Eigen::Vector3d(rng.uniform(-0.04, 0.04), rng.uniform(-0.04, 0.04), rng.uniform(-0.04, 0.04));
    const double hair_tone = rng.uniform(0.0, 1.0);
    s.albedo.hair_rgb = Eigen::Vector3d(0.05 + 0.5 * hair_tone, 0.04 + 0.35 * hair_tone, 0.03 + 0.2 * hair_tone);
    s.albedo.hairline = rng.uniform(0.35, 0.6);
    SplitMix64 tex(s.albedo.texture_seed);
    for (std::size_t i = 0; i < 3; ++i) {
        s.albedo.wave_dirs[i] = Eigen::Vector3d(tex.normal(), tex.normal(), tex.normal()) * 4.0;
        s.albedo.wave_phase[i] = tex.uniform(0.0, 6.283185307179586);
    }
    s.albedo.texture_amplitude = rng.uniform(0.05, 0.15);

    s.specular.strength = rng.uniform(0.05, 0.3);
    s.specular.exponent = rng.uniform(8.0, 64.0);

    const auto& le = s.features[0];
    const auto& re = s.features[1];
    const auto& nose = s.features[static_cast<std::size_t>(Feature::Nose)];
    const auto& mouth = s.features[static_cast<std::size_t>(Feature::Mouth)];
    auto front = [](const Ellipsoid& e) { return Eigen::Vector3d(e.center + Eigen::Vector3d(0, 0, e.semi_axes.z())); };
    auto on_ellipsoid = [](const Ellipsoid& e, const Eigen::Vector3d& dir) {
        const Eigen::Vector3d d = dir.normalized();
        const double scale = 1.0 / d.cwiseQuotient(e.semi_axes).norm();
        return Eigen::Vector3d(e.center + d * scale);
    };
    s.keypoints3d = {
        front(le),
        front(re),
        front(nose),
        on_ellipsoid(nose, {0.0, 0.8, 0.6}),
        on_ellipsoid(mouth, {-1.0, 0.0, 0.15}),
        on_ellipsoid(mouth, {1.0, 0.0, 0.15}),
        front(mouth),
        on_head(0.0, -1.0, 0.55),
        on_head(0.0, 0.55, 1.0),
        on_head(-0.6, -0.2, 0.75),
        on_head(0.6, -0.2, 0.75),
        on_head(-0.85, 0.3, 0.5),
    };
    return s;
}

}  // namespace relit::stage
