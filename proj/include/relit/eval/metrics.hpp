// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "relit/core/image.hpp"
#include "relit/stage/camera.hpp"
#include "relit/stage/subject.hpp"

namespace relit::eval {

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over all pixels and channels; identical images give kPsnrCap.
double psnr(const Image& a, const Image& b);

/// Mean local SSIM of the Rec.601 luma of both images, 7x7 Gaussian window
/// (sigma 1.5), C1 = 0.01^2, C2 = 0.03^2, valid-region only.
double ssim(const Image& a, const Image& b);

/// Rec.601 luma weights used by ssim().
inline constexpr double kLuma601[3] = {0.299, 0.587, 0.114};

struct Keypoint2 {
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
    bool valid = false;
};

/// Mean Euclidean distance over pairs valid in both sets. Throws when the
/// counts differ or no pair is valid.
double landmark_distance(std::span<const Keypoint2> predicted, std::span<const Keypoint2> truth);

struct TemplateMatchOptions {
    int search_window = 9;  ///< side of the square search region, in pixels
    int patch_radius = 3;   ///< template is (2r+1)^2 pixels
};

/// Locates each ground-truth keypoint in `prediction` by SSD template
/// matching against a patch of `reference` centered at the keypoint.
/// Out-of-image pixels read as black; ties prefer the smallest offset.
std::vector<Keypoint2> locate_keypoints(const Image& prediction, const Image& reference,
                                        std::span<const Keypoint2> truth, const TemplateMatchOptions& options = {});

/// Ground-truth 2D keypoints of a subject; valid when in front of the
/// camera and inside the image.
std::vector<Keypoint2> project_keypoints(const stage::SyntheticSubject& subject, const stage::CameraPose& pose);

/// Landmark distance of `prediction` against `reference` around the
/// subject's projected keypoints.
double image_landmark_distance(const Image& prediction, const Image& reference, const stage::SyntheticSubject& subject,
                               const stage::CameraPose& pose, const TemplateMatchOptions& options = {});

}  // namespace relit::eval
