// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "relit/core/error.hpp"
#include "relit/core/rng.hpp"
#include "relit/eval/metrics.hpp"

using namespace relit;
using namespace relit::eval;

namespace {

Image random_image(int w, int h, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Image img(w, h);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    return img;
}

Image shifted(const Image& src, int dx, int dy) {
    Image out(src.width, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            const int sx = x - dx, sy = y - dy;
            if (sx < 0 || sy < 0 || sx >= src.width || sy >= src.height) continue;
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = src.at(sx, sy, c);
        }
    return out;
}

}  // namespace

TEST(Psnr, IdenticalImagesAreCapped) {
    const auto a = random_image(8, 8, 1);
    EXPECT_EQ(psnr(a, a), kPsnrCap);
}

TEST(Psnr, UniformOffsetOfOneTenthIsTwentyDecibels) {
    Image a(8, 8, 0.5f), b(8, 8, 0.6f);
    EXPECT_NEAR(psnr(a, b), 20.0, 0.01);
}

TEST(Psnr, MatchesBruteForceOracle) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto a = random_image(13, 7, s);
        const auto b = random_image(13, 7, s + 100);
        double mse = 0;
        for (std::size_t i = 0; i < a.data.size(); ++i) mse += std::pow(double(a.data[i]) - b.data[i], 2);
        mse /= static_cast<double>(a.data.size());
        EXPECT_NEAR(psnr(a, b), -10 * std::log10(mse), 0.01);
    }
}

TEST(Psnr, ShapeMismatchIsRejected) {
    EXPECT_THROW(psnr(Image(4, 4), Image(4, 5)), Error);
}

TEST(Ssim, IdenticalIsOne) {
    const auto a = random_image(32, 24, 3);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-9);
}

TEST(Ssim, CheckerboardVersusNegativeIsLow) {
    Image a(32, 32), b(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            for (int c = 0; c < 3; ++c) {
                a.at(x, y, c) = ((x + y) % 2) ? 1.0f : 0.0f;
                b.at(x, y, c) = 1.0f - a.at(x, y, c);
            }
    EXPECT_LT(ssim(a, b), 0.5);
}

TEST(Ssim, SymmetricAndBounded) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto a = random_image(20, 20, s);
        const auto b = random_image(20, 20, s + 50);
        const double ab = ssim(a, b);
        EXPECT_NEAR(ab, ssim(b, a), 1e-9);
        EXPECT_GE(ab, -1.0);
        EXPECT_LE(ab, 1.0);
    }
}

TEST(LandmarkDistance, IdenticalIsZero) {
    std::vector<Keypoint2> k = {{{1, 2}, true}, {{5, 6}, true}};
    EXPECT_EQ(landmark_distance(k, k), 0.0);
}

TEST(LandmarkDistance, ThreeFourShiftIsFive) {
    std::vector<Keypoint2> truth, pred;
    for (int i = 0; i < 12; ++i) {
        truth.push_back({{double(i), double(2 * i)}, true});
        pred.push_back({{i + 3.0, 2 * i + 4.0}, true});
    }
    EXPECT_EQ(landmark_distance(pred, truth), 5.0);
}

TEST(LandmarkDistance, MatchesBruteForceAndSkipsInvalidPairs) {
    SplitMix64 rng(8);
    std::vector<Keypoint2> a, b;
    double sum = 0;
    int n = 0;
    for (int i = 0; i < 20; ++i) {
        Keypoint2 p{{rng.uniform(0, 64), rng.uniform(0, 64)}, rng.uniform() > 0.2};
        Keypoint2 q{{rng.uniform(0, 64), rng.uniform(0, 64)}, rng.uniform() > 0.2};
        if (p.valid && q.valid) {
            sum += std::hypot(p.pixel.x() - q.pixel.x(), p.pixel.y() - q.pixel.y());
            ++n;
        }
        a.push_back(p);
        b.push_back(q);
    }
    ASSERT_GT(n, 0);
    EXPECT_NEAR(landmark_distance(a, b), sum / n, 1e-9);
}

TEST(LandmarkDistance, NoValidPairIsAnError) {
    std::vector<Keypoint2> a = {{{1, 1}, false}}, b = {{{1, 1}, true}};
    EXPECT_THROW(landmark_distance(a, b), Error);
    EXPECT_THROW(landmark_distance(a, std::vector<Keypoint2>{}), Error);
}

TEST(TemplateMatch, RecoversKnownShift) {
    // Smooth random blobs so every patch is distinctive.
    Image ref(48, 48);
    SplitMix64 rng(4);
    for (int k = 0; k < 30; ++k) {
        const double cx = rng.uniform(0, 48), cy = rng.uniform(0, 48), r = rng.uniform(2, 6);
        const float col[3] = {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())};
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 48; ++x) {
                const double g = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (r * r));
                for (int c = 0; c < 3; ++c) ref.at(x, y, c) += static_cast<float>(col[c] * g);
            }
    }
    std::vector<Keypoint2> truth = {{{20.5, 20.5}, true}, {{30.5, 15.5}, true}, {{12.5, 33.5}, true}};
    const auto same = locate_keypoints(ref, ref, truth);
    EXPECT_EQ(landmark_distance(same, truth), 0.0);
    const auto moved = locate_keypoints(shifted(ref, 2, 1), ref, truth);
    EXPECT_NEAR(landmark_distance(moved, truth), std::sqrt(5.0), 1e-9);
}
