// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "relit/core/error.hpp"
#include "relit/core/runtime.hpp"
#include "relit/gen3d/checkpoint.hpp"
#include "relit/train/relighter_train.hpp"

using namespace relit;
using namespace relit::train;
namespace fs = std::filesystem;

namespace {

torch::Tensor rand_tensor(std::vector<std::int64_t> shape, std::uint64_t seed, c10::ScalarType dtype = torch::kFloat) {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    return torch::rand(shape, gen, dtype);
}

}  // namespace

TEST(Losses, ReconstructionClosedForms) {
    const auto a = rand_tensor({2, 3, 8, 8}, 1);
    EXPECT_EQ(loss_reconstruction(a, a).item<float>(), 0.0f);
    const auto b = torch::full({1, 3, 4, 4}, 0.5), c = torch::full({1, 3, 4, 4}, 0.6);
    EXPECT_NEAR(loss_reconstruction(b, c).item<float>(), 0.1, 1e-7);
}

TEST(Losses, ReconstructionMatchesElementwiseOracle) {
    const auto a = rand_tensor({2, 3, 5, 7}, 2), b = rand_tensor({2, 3, 5, 7}, 3);
    const auto fa = a.flatten(), fb = b.flatten();
    double sum = 0;
    for (std::int64_t i = 0; i < fa.numel(); ++i) sum += std::abs(fa[i].item<double>() - fb[i].item<double>());
    EXPECT_NEAR(loss_reconstruction(a, b).item<double>(), sum / fa.numel(), 1e-7);
}

TEST(Losses, LatentClosedFormsAndOracle) {
    const auto w = rand_tensor({2, 8, 64}, 4, torch::kDouble);
    EXPECT_EQ(loss_latent(w, w).item<double>(), 0.0);
    auto t = w.clone();
    const double eps = 0.25;
    t[1][3][17] += eps;
    EXPECT_NEAR(loss_latent(w, t).item<double>(), eps * eps / static_cast<double>(w.numel()), 1e-15);

    const auto a = rand_tensor({3, 4}, 5), b = rand_tensor({3, 4}, 6);
    double sum = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) sum += std::pow(a[i][j].item<double>() - b[i][j].item<double>(), 2);
    EXPECT_NEAR(loss_latent(a, b).item<double>(), sum / 12, 1e-7);
}

TEST(Losses, TotalIsTheWeightedSum) {
    LossParts zero{torch::zeros({}), torch::zeros({}), torch::zeros({})};
    EXPECT_EQ(loss_total(zero, {}).item<float>(), 0.0f);
    LossParts ones{torch::ones({}, torch::kDouble), torch::ones({}, torch::kDouble), torch::ones({}, torch::kDouble)};
    EXPECT_NEAR(loss_total(ones, {}).item<double>(), 11.01, 1e-12);
    LossParts mixed{torch::full({}, 2.0, torch::kDouble), torch::full({}, 3.0, torch::kDouble),
                    torch::full({}, 5.0, torch::kDouble)};
    EXPECT_NEAR(loss_total(mixed, {1.0, 2.0, 0.5}).item<double>(), 2 + 6 + 2.5, 1e-12);
}

TEST(Perceptual, ZeroOnIdenticalSymmetricAndNonnegative) {
    init_runtime();
    PerceptualExtractor p;
    const auto a = rand_tensor({2, 3, 32, 32}, 7), b = rand_tensor({2, 3, 32, 32}, 8);
    EXPECT_EQ(p->distance(a, a).item<float>(), 0.0f);
    EXPECT_NEAR(p->distance(a, b).item<float>(), p->distance(b, a).item<float>(), 1e-7);
    EXPECT_GT(p->distance(a, b).item<float>(), 0.0f);
    EXPECT_EQ(p->features(a).size(), 3u);
}

TEST(Perceptual, SeedDefinesTheExtractor) {
    init_runtime();
    const auto a = rand_tensor({1, 3, 16, 16}, 9), b = rand_tensor({1, 3, 16, 16}, 10);
    PerceptualExtractor p1, p2, other(1);
    EXPECT_EQ(p1->distance(a, b).item<float>(), p2->distance(a, b).item<float>());
    EXPECT_NE(p1->distance(a, b).item<float>(), other->distance(a, b).item<float>());
}

TEST(Perceptual, DecreasesAsPredictionBlendsTowardTarget) {
    init_runtime();
    PerceptualExtractor p;
    double d0 = 0, d5 = 0, d1 = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto pred = rand_tensor({1, 3, 32, 32}, 100 + s), target = rand_tensor({1, 3, 32, 32}, 200 + s);
        const double a = p->distance(pred, target).item<double>();
        const double b = p->distance(0.5 * pred + 0.5 * target, target).item<double>();
        const double c = p->distance(target, target).item<double>();
        EXPECT_GT(a, b);
        EXPECT_GT(b, c);
        d0 += a, d5 += b, d1 += c;
    }
    EXPECT_GT(d0, d5);
    EXPECT_GT(d5, d1);
}

TEST(Gradients, ReconstructionMatchesFiniteDifferences) {
    const auto target = rand_tensor({1, 3, 4, 4}, 11, torch::kDouble);
    const auto x = rand_tensor({1, 3, 4, 4}, 12, torch::kDouble);
    EXPECT_LT(gradient_check([&](const torch::Tensor& p) { return loss_reconstruction(p, target); }, x), 1e-3);
}

TEST(Gradients, LatentMatchesFiniteDifferences) {
    const auto target = rand_tensor({2, 8, 4}, 13, torch::kDouble);
    const auto x = rand_tensor({2, 8, 4}, 14, torch::kDouble);
    EXPECT_LT(gradient_check([&](const torch::Tensor& p) { return loss_latent(p, target); }, x), 1e-3);
}

TEST(Gradients, PerceptualMatchesFiniteDifferences) {
    init_runtime();
    PerceptualExtractor p;
    const auto target = rand_tensor({1, 3, 8, 8}, 15, torch::kDouble);
    const auto x = rand_tensor({1, 3, 8, 8}, 16, torch::kDouble);
    EXPECT_LT(gradient_check([&](const torch::Tensor& v) { return p->distance(v, target); }, x), 1e-3);
}

TEST(Gradients, TotalMatchesFiniteDifferencesThroughAParameter) {
    init_runtime();
    PerceptualExtractor p;
    const auto base = rand_tensor({1, 3, 8, 8}, 17, torch::kDouble);
    const auto target = rand_tensor({1, 3, 8, 8}, 18, torch::kDouble);
    const auto w = rand_tensor({1, 8, 6}, 19, torch::kDouble);
    const auto w_t = rand_tensor({1, 8, 6}, 20, torch::kDouble);
    const auto theta = rand_tensor({6}, 21, torch::kDouble);
    auto f = [&](const torch::Tensor& t) {
        const auto w_r = w + t;
        const auto image = base * (1 + 0.1 * t.sum());
        return loss_total({loss_latent(w_r, w_t), loss_reconstruction(image, target), p->distance(image, target)}, {});
    };
    EXPECT_LT(gradient_check(f, theta), 1e-3);
}

TEST(Sampler, EpochCoversEveryPairOnceWithSharedSubjectAndCamera) {
    PairSampler sampler(3, {1, 4}, 3, 42);
    EXPECT_EQ(sampler.epoch_size(), 3u * 2 * 3 * 3);
    std::set<std::tuple<int, int, int, int>> seen;
    const auto batch = sampler.next_batch(static_cast<int>(sampler.epoch_size()));
    std::set<int> subjects;
    for (const auto& p : batch) {
        seen.insert({p.subject_slot, p.camera, p.source_env, p.target_env});
        subjects.insert(p.subject_slot);
        EXPECT_TRUE(p.camera == 1 || p.camera == 4);
    }
    EXPECT_EQ(seen.size(), sampler.epoch_size());
    EXPECT_EQ(subjects.size(), 3u);
    EXPECT_EQ(sampler.epoch(), 0);
    sampler.next_batch(1);
    EXPECT_EQ(sampler.epoch(), 1);
}

TEST(Sampler, SeedDeterminesOrder) {
    PairSampler a(4, {0}, 3, 7), b(4, {0}, 3, 7), c(4, {0}, 3, 8);
    const auto x = a.next_batch(20), y = b.next_batch(20), z = c.next_batch(20);
    EXPECT_EQ(x, y);
    EXPECT_NE(x, z);
    EXPECT_THROW(PairSampler(0, {0}, 1, 0), Error);
}

TEST(Permutation, IsAPermutation) {
    SplitMix64 rng(3);
    auto p = permutation(50, rng);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(p[i], i);
}

TEST(TrainConfig, RejectsNegativeWeightsAndBadSchedule) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.weights.latent, 10.0);
    EXPECT_EQ(c.weights.reconstruction, 0.01);
    EXPECT_EQ(c.weights.perceptual, 1.0);
    EXPECT_EQ(c.lr, 3e-4);
    EXPECT_EQ(c.batch, 8);
    c.weights.perceptual = -1;
    EXPECT_THROW(c.validate(), Error);
    c = TrainConfig{};
    c.batch = 0;
    EXPECT_THROW(c.validate(), Error);
}

class RelighterTraining : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        init_runtime();
        root_ = fs::temp_directory_path() / "relit_test_train";
        fs::remove_all(root_);
        stage::DatasetConfig c;
        c.subjects = 3;
        c.holdout_subjects = 1;
        c.cameras = 2;
        c.lights = 4;
        c.envs = 3;
        c.holdout_envs = 1;
        c.resolution = 64;
        stage::build_dataset(c, root_ / "data", root_ / "envmaps");
    }
    static void TearDownTestSuite() { fs::remove_all(root_); }

    struct Run {
        std::vector<nlohmann::json> log;
        RelighterTrainReport report;
        std::string relighter_sum;
    };

    Run run(int steps, std::optional<fs::path> state = {}, int checkpoint_every = 100) {
        const auto ds = stage::Dataset::open(root_ / "data", root_ / "envmaps");
        gen3d::GeneratorConfig gc;
        gc.samples = 8;
        gen3d::Generator g(gc, 1);
        invert::Inverter inv(g, invert::Encoder(gc, torch::zeros({gc.latent_layers, gc.latent_dim}), 2),
                             invert::Afa(gc, 3));
        relight::RelightModel model(g, relight::Relighter(gc, relight::RelighterConfig{4, 32, 3}, 4));
        ImageBank bank(ds, ds.subjects(stage::Split::Train), ds.envs(stage::Split::Train));
        ImageBank val(ds, ds.subjects(stage::Split::Eval), ds.envs(stage::Split::Eval));
        TrainConfig tc;
        tc.batch = 2;
        tc.steps = steps;
        tc.validate_every = 2;
        tc.checkpoint_every = checkpoint_every;
        tc.validation_pairs = 2;
        tc.lr = 1e-3;
        Run r;
        RelighterTrainOptions opt;
        opt.cameras = {0, 1};
        opt.state_path = state;
        opt.log = [&](const nlohmann::json& j) { r.log.push_back(j); };
        r.report = train_relighter(model, inv, bank, val, tc, opt);
        r.relighter_sum = gen3d::weights_checksum(*model.relighter());
        return r;
    }

    static fs::path root_;
};
fs::path RelighterTraining::root_;

TEST_F(RelighterTraining, SeededRunsAreIdenticalAndFrozenModulesUntouched) {
    const auto a = run(4), b = run(4);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i], b.log[i]);
    EXPECT_EQ(a.relighter_sum, b.relighter_sum);
    EXPECT_EQ(a.report.frozen_before, a.report.frozen_after);
    EXPECT_EQ(a.report.frozen_before.size(), 3u);
    EXPECT_TRUE(a.log.back().contains("validation"));
    EXPECT_TRUE(a.log.back().contains("L_LPIPS"));
}

TEST_F(RelighterTraining, ResumeContinuesToTheSameWeights) {
    const auto state = root_ / "state.pt";
    const auto straight = run(4);
    fs::remove(state);
    run(2, state, 1);
    const auto resumed = run(4, state, 1);
    EXPECT_EQ(resumed.report.resumed_from, 2);
    EXPECT_EQ(resumed.relighter_sum, straight.relighter_sum);
}
