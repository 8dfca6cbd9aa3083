// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "relit/cli/cli.hpp"
#include "relit/core/sha256.hpp"
#include "relit/gen3d/checkpoint.hpp"
#include "relit/io/image_io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kTiny = {
    "data.subjects=3",    "data.holdout_subjects=1", "data.cameras=3",          "data.lights=4",
    "data.envs=4",        "data.holdout_envs=2",     "gen.steps=2",             "gen.samples=8",
    "gen.batch=2",        "invert.latent_steps=2",   "invert.image_steps=2",    "invert.afa_steps=2",
    "invert.batch=2",     "relight.hidden=16",       "relight.layers=3",        "relight.steps=2",
    "relight.batch=2",    "relight.views=1",         "relight.validate_every=1", "relight.checkpoint_every=1",
    "ablate.views=1, 2",  "ablate.subjects=1",       "bench.frames=2"};

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args, const fs::path& workdir, bool tiny = true) {
    std::vector<std::string> full = {"relit"};
    full.insert(full.end(), args.begin(), args.end());
    full.push_back("-w");
    full.push_back(workdir.string());
    full.push_back("--quiet");
    if (tiny)
        for (const auto& s : kTiny) {
            full.push_back("--set");
            full.push_back(s);
        }
    std::vector<const char*> argv;
    for (const auto& s : full) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = relit::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / "relit_test_cli" / name;
    fs::remove_all(p);
    return p;
}

std::string file_text(const fs::path& p) {
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), {}};
}

class CliPipeline : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        ws_ = fs::temp_directory_path() / "relit_test_cli" / "pipeline";
        const auto r = run_cli({"pipeline", "--resume"}, ws_);
        ASSERT_EQ(r.code, 0) << r.err;
    }
    static fs::path ws_;
};
fs::path CliPipeline::ws_;

}  // namespace

TEST(Cli, UnknownConfigKeyExitsTwoNamingTheKey) {
    const auto r = run_cli({"gen-data", "--set", "data.colour=3"}, scratch("badkey"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("data.colour"), std::string::npos);
}

TEST(Cli, UnparsableArgumentsExitTwo) {
    EXPECT_EQ(run_cli({"train", "everything"}, scratch("badstage")).code, 2);
    EXPECT_EQ(run_cli({"gen-data", "--frobnicate"}, scratch("badflag")).code, 2);
}

TEST(Cli, GenDataIsDeterministic) {
    const auto a = scratch("gen_a"), b = scratch("gen_b");
    ASSERT_EQ(run_cli({"gen-data"}, a).code, 0);
    ASSERT_EQ(run_cli({"gen-data"}, b).code, 0);
    EXPECT_EQ(file_text(a / "data/meta.json"), file_text(b / "data/meta.json"));
    const auto again = run_cli({"gen-data", "--resume"}, a);
    EXPECT_EQ(again.code, 0);
    EXPECT_NE(again.out.find("up to date"), std::string::npos);
    EXPECT_FALSE(fs::is_empty(a / "runs"));
}

TEST(Cli, TrainRelightWithoutEncoderExitsThree) {
    const auto ws = scratch("noencoder");
    EXPECT_EQ(run_cli({"train", "generator"}, ws).code, 3);
    ASSERT_EQ(run_cli({"gen-data"}, ws).code, 0);
    ASSERT_EQ(run_cli({"train", "generator"}, ws).code, 0);
    const auto r = run_cli({"train", "relight"}, ws);
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("encoder"), std::string::npos);
    EXPECT_EQ(run_cli({"eval"}, ws).code, 3);
}

TEST_F(CliPipeline, StagedRunProducesEveryArtifact) {
    for (const char* c : {"generator", "encoder", "afa", "relighter"})
        EXPECT_TRUE(fs::exists(ws_ / "checkpoints" / (std::string(c) + ".ckpt"))) << c;
    bool eval_report = false;
    for (const auto& e : fs::directory_iterator(ws_ / "reports"))
        if (e.path().extension() == ".jsonl" && e.path().filename().string().rfind("eval-", 0) == 0) {
            eval_report = true;
            EXPECT_NE(file_text(e.path()).find("\"copy_input\""), std::string::npos);
        }
    EXPECT_TRUE(eval_report);
    EXPECT_TRUE(fs::exists(ws_ / "logs/relight.jsonl"));
}

TEST_F(CliPipeline, ResumeSkipsUpToDateStages) {
    const auto before = relit::gen3d::read_checkpoint_header(ws_ / "checkpoints/relighter.ckpt");
    const auto r = run_cli({"pipeline", "--resume"}, ws_);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(relit::gen3d::read_checkpoint_header(ws_ / "checkpoints/relighter.ckpt"), before);
}

TEST_F(CliPipeline, RelightWritesFramesSidecarsAndMetrics) {
    const auto out = ws_ / "frames";
    const auto r = run_cli({"relight", "--subject", "2", "--camera", "0", "--env", "env02", "--yaw", "-10,0,80", "-o",
                          out.string()},
                         ws_);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("metrics camera=0 psnr="), std::string::npos);
    for (int i = 0; i < 3; ++i) {
        const auto stem = out / ("frame_00" + std::to_string(i));
        EXPECT_EQ(relit::io::read_png(stem.string() + ".png").width, 64);
        const auto side = json::parse(file_text(stem.string() + ".json"));
        EXPECT_EQ(side["extrapolated_pose"].get<bool>(), i == 2);
    }
    EXPECT_TRUE(fs::exists(out / "comparison.png"));
}

TEST_F(CliPipeline, UnknownEnvExitsFourListingEnvs) {
    const auto r = run_cli({"relight", "--subject", "2", "--camera", "0", "--env", "moonlight", "-o",
                          (ws_ / "nowhere").string()},
                         ws_);
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("env00, env01, env02, env03"), std::string::npos);
}

TEST_F(CliPipeline, BenchReportsTheThreeTimings) {
    const auto r = run_cli({"bench"}, ws_);
    ASSERT_EQ(r.code, 0) << r.err;
    bool found = false;
    for (const auto& e : fs::directory_iterator(ws_ / "reports"))
        if (e.path().filename().string().rfind("bench-", 0) == 0) {
            const auto j = json::parse(file_text(e.path()));
            for (const char* k : {"invert_ms", "relight_ms", "render_ms", "render_fps"}) EXPECT_TRUE(j.contains(k)) << k;
            found = true;
        }
    EXPECT_TRUE(found);
}

TEST_F(CliPipeline, AblationTabulatesEveryVariant) {
    const auto r = run_cli({"ablate", "--resume"}, ws_);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* v : {"full", "no_fspace", "no_lpips", "views_1", "views_2", "subjects_1"})
        EXPECT_NE(r.out.find(v), std::string::npos) << v;
}

TEST_F(CliPipeline, RunManifestEchoesConfigAndExitCode) {
    for (const auto& e : fs::directory_iterator(ws_ / "runs")) {
        const auto j = json::parse(file_text(e.path()));
        EXPECT_TRUE(j.contains("config"));
        EXPECT_TRUE(j.contains("version"));
        EXPECT_TRUE(j.contains("exit_code"));
    }
}

TEST(Cli, SameSeedGivesIdenticalResults) {
    const auto a = scratch("seed_a"), b = scratch("seed_b");
    ASSERT_EQ(run_cli({"pipeline", "--seed", "1"}, a).code, 0);
    ASSERT_EQ(run_cli({"pipeline", "--seed", "1"}, b).code, 0);
    for (const char* c : {"generator", "encoder", "afa", "relighter"}) {
        const auto ha = relit::gen3d::read_checkpoint_header(a / "checkpoints" / (std::string(c) + ".ckpt"));
        const auto hb = relit::gen3d::read_checkpoint_header(b / "checkpoints" / (std::string(c) + ".ckpt"));
        EXPECT_EQ(ha["weights_sha256"], hb["weights_sha256"]) << c;
    }
}
