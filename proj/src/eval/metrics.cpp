// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relit/core/error.hpp"

namespace relit::eval {
namespace {

std::vector<double> luma(const Image& img) {
    std::vector<double> out(img.pixel_count());
    for (std::size_t p = 0; p < out.size(); ++p)
        out[p] = kLuma601[0] * img.data[p * 3] + kLuma601[1] * img.data[p * 3 + 1] + kLuma601[2] * img.data[p * 3 + 2];
    return out;
}

std::array<double, 7> gaussian7() {
    std::array<double, 7> k{};
    double s = 0;
    for (int i = 0; i < 7; ++i) {
        const double x = i - 3;
        k[static_cast<std::size_t>(i)] = std::exp(-x * x / (2 * 1.5 * 1.5));
        s += k[static_cast<std::size_t>(i)];
    }
    for (auto& v : k) v /= s;
    return k;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw Error("psnr: image shapes differ");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.data.size());
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw Error("ssim: image shapes differ");
    if (a.width < 7 || a.height < 7) throw Error("ssim: images must be at least 7x7");
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const auto x = luma(a);
    const auto y = luma(b);
    const auto k = gaussian7();
    const int w = a.width, h = a.height;
    double total = 0.0;
    int count = 0;
    for (int cy = 3; cy < h - 3; ++cy)
        for (int cx = 3; cx < w - 3; ++cx) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int j = -3; j <= 3; ++j)
                for (int i = -3; i <= 3; ++i) {
                    const double wt = k[static_cast<std::size_t>(i + 3)] * k[static_cast<std::size_t>(j + 3)];
                    const std::size_t p = static_cast<std::size_t>(cy + j) * w + (cx + i);
                    mx += wt * x[p];
                    my += wt * y[p];
                    sxx += wt * x[p] * x[p];
                    syy += wt * y[p] * y[p];
                    sxy += wt * x[p] * y[p];
                }
            const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    return total / count;
}

double landmark_distance(std::span<const Keypoint2> predicted, std::span<const Keypoint2> truth) {
    if (predicted.size() != truth.size()) throw Error("landmark_distance: keypoint counts differ");
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!predicted[i].valid || !truth[i].valid) continue;
        sum += (predicted[i].pixel - truth[i].pixel).norm();
        ++n;
    }
    if (n == 0) throw Error("landmark_distance: no valid keypoint pairs");
    return sum / n;
}

std::vector<Keypoint2> locate_keypoints(const Image& prediction, const Image& reference,
                                        std::span<const Keypoint2> truth, const TemplateMatchOptions& opt) {
    if (!prediction.same_shape(reference)) throw Error("locate_keypoints: image shapes differ");
    auto px = [](const Image& img, int x, int y, int c) {
        return (x < 0 || y < 0 || x >= img.width || y >= img.height) ? 0.0f : img.at(x, y, c);
    };
    const int half = opt.search_window / 2;
    const int r = opt.patch_radius;
    std::vector<Keypoint2> out;
    for (const auto& kp : truth) {
        Keypoint2 found;
        const bool in_image = kp.pixel.x() >= 0 && kp.pixel.y() >= 0 && kp.pixel.x() < reference.width &&
                              kp.pixel.y() < reference.height;
        if (!kp.valid || !in_image) {
            out.push_back(found);
            continue;
        }
        const int gx = static_cast<int>(std::floor(kp.pixel.x()));
        const int gy = static_cast<int>(std::floor(kp.pixel.y()));
        double best = std::numeric_limits<double>::infinity();
        int best_dx = 0, best_dy = 0;
        for (int dy = -half; dy <= half; ++dy)
            for (int dx = -half; dx <= half; ++dx) {
                double ssd = 0.0;
                for (int j = -r; j <= r; ++j)
                    for (int i = -r; i <= r; ++i)
                        for (int c = 0; c < 3; ++c) {
                            const double d = px(prediction, gx + dx + i, gy + dy + j, c) - px(reference, gx + i, gy + j, c);
                            ssd += d * d;
                        }
                const bool closer = dx * dx + dy * dy < best_dx * best_dx + best_dy * best_dy;
                if (ssd < best - 1e-12 || (std::abs(ssd - best) <= 1e-12 && closer)) {
                    best = ssd;
                    best_dx = dx;
                    best_dy = dy;
                }
            }
        found.valid = true;
        found.pixel = kp.pixel + Eigen::Vector2d(best_dx, best_dy);
        out.push_back(found);
    }
    return out;
}

std::vector<Keypoint2> project_keypoints(const stage::SyntheticSubject& subject, const stage::CameraPose& pose) {
    std::vector<Keypoint2> out;
    for (const auto& k : subject.keypoints3d) {
        const auto p = stage::project(pose, k);
        out.push_back({p.pixel, p.valid && p.inside});
    }
    return out;
}

double image_landmark_distance(const Image& prediction, const Image& reference, const stage::SyntheticSubject& subject,
                               const stage::CameraPose& pose, const TemplateMatchOptions& options) {
    const auto truth = project_keypoints(subject, pose);
    const auto found = locate_keypoints(prediction, reference, truth, options);
    return landmark_distance(found, truth);
}

}  // namespace relit::eval
