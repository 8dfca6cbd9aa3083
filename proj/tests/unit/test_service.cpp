// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/service/service.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <stdlib.h>

#include <latch>
#include <set>
#include <thread>

#include "relit/core/error.hpp"
#include "relit/core/runtime.hpp"
#include "relit/illum/envmap.hpp"
#include "relit/io/image_io.hpp"

using namespace relit;
using namespace relit::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path& root() {
    static const fs::path r = fs::temp_directory_path() / "relit_test_service";
    return r;
}

pipeline::Models random_models(int lights) {
    gen3d::GeneratorConfig gc;
    gc.samples = 8;
    pipeline::Models m;
    m.generator = gen3d::Generator(gc, 1);
    m.encoder = invert::Encoder(gc, torch::zeros({gc.latent_layers, gc.latent_dim}), 2);
    m.afa = invert::Afa(gc, 3);
    m.relighter = relight::Relighter(gc, relight::RelighterConfig{lights, 32, 3}, 4);
    {
        // Nonzero last layer so different envs give different latents.
        torch::NoGradGuard ng;
        for (auto& p : m.relighter->parameters()) p.add_(0.01);
    }
    m.inverter.emplace(m.generator, m.encoder, m.afa);
    m.model.emplace(m.generator, m.relighter);
    return m;
}

struct FakeClock {
    Clock::time_point now = Clock::time_point{} + std::chrono::hours(1);
};

class ServiceTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        init_runtime();
        fs::remove_all(root());
        stage::DatasetConfig c;
        c.subjects = 2;
        c.holdout_subjects = 1;
        c.cameras = 2;
        c.lights = 4;
        c.envs = 12;
        c.holdout_envs = 4;
        c.resolution = 64;
        stage::build_dataset(c, root() / "data", root() / "envmaps");
        dataset_ = std::make_unique<stage::Dataset>(stage::Dataset::open(root() / "data", root() / "envmaps"));
    }
    static void TearDownTestSuite() {
        dataset_.reset();
        fs::remove_all(root());
    }

    void SetUp() override {
        ServiceOptions o;
        o.ttl = std::chrono::seconds(30);
        o.clock = [this] { return clock_.now; };
        service_ = std::make_unique<RelightService>(o);
        service_->load(random_models(4), load_env_entries(*dataset_, root() / "envmaps"), *dataset_);
    }

    std::string new_session(int subject = 0, const std::string& env = "env00", int camera = 0) {
        const auto r = service_->create_session(
            "application/json", json{{"subject", subject}, {"env", env}, {"camera", camera}}.dump(), {});
        EXPECT_EQ(r.status, 201) << r.body;
        return json::parse(r.body).at("session_id");
    }
    static std::string env_body(const std::string& env) { return json{{"env", env}}.dump(); }

    static std::unique_ptr<stage::Dataset> dataset_;
    FakeClock clock_;
    std::unique_ptr<RelightService> service_;
};
std::unique_ptr<stage::Dataset> ServiceTest::dataset_;

}  // namespace

TEST_F(ServiceTest, ItemReferenceCreatesSessionWithTimingHeader) {
    const auto r = service_->create_session("application/json", R"({"subject":1,"env":"env08","camera":1})", {});
    ASSERT_EQ(r.status, 201) << r.body;
    const auto id = json::parse(r.body).at("session_id").get<std::string>();
    EXPECT_EQ(id.size(), 16u);
    EXPECT_EQ(r.headers.at("Server-Timing").rfind("invert;dur=", 0), 0u);
    EXPECT_EQ(r.headers.at("Location"), "/sessions/" + id);
    EXPECT_EQ(service_->debug(id).status, 200);
    EXPECT_EQ(service_->live_sessions(), 1u);
}

TEST_F(ServiceTest, WrongSizeUploadIsRejectedWithRequiredSize) {
    const auto png = io::encode_png(Image(100, 100, 0.5f));
    const auto r = service_->create_session("image/png", std::string(png.begin(), png.end()), {});
    EXPECT_EQ(r.status, 400);
    EXPECT_NE(r.body.find("64x64"), std::string::npos);
    EXPECT_NE(r.body.find("100x100"), std::string::npos);
    EXPECT_EQ(service_->create_session("image/png", "garbage", {}).status, 400);
}

TEST_F(ServiceTest, SameUploadTwiceGivesDistinctIdsAndEqualLatents) {
    const auto png = io::encode_png(dataset_->relit(0, "env01", 1));
    const std::string body(png.begin(), png.end());
    const auto a = service_->create_session("image/png", body, {});
    const auto b = service_->create_session("image/png", body, {});
    ASSERT_EQ(a.status, 201);
    ASSERT_EQ(b.status, 201);
    const std::string ia = json::parse(a.body)["session_id"], ib = json::parse(b.body)["session_id"];
    EXPECT_NE(ia, ib);
    EXPECT_EQ(json::parse(service_->debug(ia).body)["w_s_sha256"], json::parse(service_->debug(ib).body)["w_s_sha256"]);
}

TEST_F(ServiceTest, UnloadedServiceAnswers503) {
    RelightService empty;
    EXPECT_FALSE(empty.ready());
    EXPECT_EQ(empty.create_session("application/json", R"({"subject":0,"env":"env00","camera":0})", {}).status, 503);
    EXPECT_EQ(empty.describe().status, 503);
}

TEST_F(ServiceTest, RelightIsIdempotentAndUnknownEnvListsEnvs) {
    const auto id = new_session();
    const auto first = service_->relight(id, env_body("env09"));
    ASSERT_EQ(first.status, 200) << first.body;
    EXPECT_FALSE(json::parse(first.body)["cached"].get<bool>());
    EXPECT_EQ(first.headers.at("Server-Timing").rfind("relight;dur=", 0), 0u);
    const auto second = service_->relight(id, env_body("env09"));
    EXPECT_TRUE(json::parse(second.body)["cached"].get<bool>());
    EXPECT_EQ(service_->counters().relight_computations, 1u);

    const auto missing = service_->relight(id, env_body("sunset"));
    EXPECT_EQ(missing.status, 404);
    EXPECT_EQ(json::parse(missing.body)["envs"].size(), 12u);
    EXPECT_EQ(service_->relight("0000000000000000", env_body("env09")).status, 404);
    EXPECT_EQ(service_->relight(id, "{}").status, 400);
}

TEST_F(ServiceTest, ConcurrentDuplicateRelightsComputeOnce) {
    const auto id = new_session();
    constexpr int kThreads = 6;
    std::latch start(kThreads);
    std::vector<Response> responses(kThreads);
    std::vector<std::thread> threads;
    for (int i = 0; i < kThreads; ++i)
        threads.emplace_back([&, i] {
            start.arrive_and_wait();
            responses[static_cast<std::size_t>(i)] = service_->relight(id, env_body("env10"));
        });
    for (auto& t : threads) t.join();
    int fresh = 0;
    for (const auto& r : responses) {
        EXPECT_EQ(r.status, 200);
        fresh += json::parse(r.body)["cached"].get<bool>() ? 0 : 1;
    }
    EXPECT_EQ(fresh, 1);
    const auto c = service_->counters();
    EXPECT_EQ(c.relight_computations, 1u);
    EXPECT_EQ(c.relight_cache_hits, kThreads - 1u);
    EXPECT_EQ(c.max_concurrent_inference, 1u);
}

TEST_F(ServiceTest, RenderRequiresRelightAndRespectsTheArc) {
    const auto id = new_session();
    EXPECT_EQ(service_->render(id, {{"env", "env08"}}).status, 409);
    ASSERT_EQ(service_->relight(id, env_body("env08")).status, 200);

    const auto r = service_->render(id, {{"env", "env08"}, {"yaw", "0"}, {"pitch", "0"}});
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(r.content_type, "image/png");
    const auto img = io::decode_png(std::vector<std::uint8_t>(r.body.begin(), r.body.end()));
    EXPECT_EQ(img.width, 64);
    EXPECT_EQ(img.height, 64);
    EXPECT_EQ(r.headers.at("Server-Timing").rfind("render;dur=", 0), 0u);
    EXPECT_EQ(r.headers.count("X-Extrapolated-Pose"), 0u);

    EXPECT_EQ(service_->render(id, {{"env", "env08"}, {"yaw", "80"}}).status, 422);
    const auto ex = service_->render(id, {{"env", "env08"}, {"yaw", "80"}, {"allow_extrapolate", "1"}});
    EXPECT_EQ(ex.status, 200);
    EXPECT_EQ(ex.headers.at("X-Extrapolated-Pose"), "1");
    EXPECT_EQ(service_->render(id, {{"yaw", "0"}}).status, 400);
    EXPECT_EQ(service_->render(id, {{"env", "env08"}, {"yaw", "left"}}).status, 400);
    EXPECT_EQ(service_->render(id, {{"env", "nowhere"}}).status, 404);
}

TEST_F(ServiceTest, RendersAreByteIdenticalAndNeverRerunTheRelighter) {
    const auto id = new_session();
    ASSERT_EQ(service_->relight(id, env_body("env11")).status, 200);
    const auto a = service_->render(id, {{"env", "env11"}, {"yaw", "12.5"}, {"pitch", "-3"}});
    const auto b = service_->render(id, {{"env", "env11"}, {"yaw", "12.5"}, {"pitch", "-3"}});
    ASSERT_EQ(a.status, 200);
    EXPECT_EQ(a.body, b.body);
    std::set<std::string> frames;
    for (int i = 0; i < 20; ++i) {
        const double yaw = -45.0 + 90.0 * i / 19.0;
        const auto r = service_->render(id, {{"env", "env11"}, {"yaw", std::to_string(yaw)}});
        ASSERT_EQ(r.status, 200);
        frames.insert(r.body);
    }
    EXPECT_GT(frames.size(), 1u);
    const auto c = service_->counters();
    EXPECT_EQ(c.relight_computations, 1u);
    EXPECT_EQ(c.renders, 22u);
}

TEST_F(ServiceTest, DistinctEnvsCacheDistinctLatentsAndPoseNeverChangesThem) {
    const auto id = new_session();
    service_->relight(id, env_body("env08"));
    service_->relight(id, env_body("env09"));
    const auto before = json::parse(service_->debug(id).body);
    EXPECT_NE(before["envs"]["env08"]["w_r_sha256"], before["envs"]["env09"]["w_r_sha256"]);
    service_->render(id, {{"env", "env08"}, {"yaw", "30"}});
    service_->render(id, {{"env", "env08"}, {"yaw", "-30"}});
    EXPECT_EQ(json::parse(service_->debug(id).body), before);
}

TEST_F(ServiceTest, IdleSessionsExpireWith410) {
    const auto id = new_session();
    clock_.now += std::chrono::seconds(20);
    EXPECT_EQ(service_->relight(id, env_body("env08")).status, 200);
    clock_.now += std::chrono::seconds(31);
    EXPECT_EQ(service_->relight(id, env_body("env08")).status, 410);
    EXPECT_EQ(service_->render(id, {{"env", "env08"}}).status, 410);
    EXPECT_EQ(service_->live_sessions(), 0u);
    EXPECT_EQ(service_->counters().expired, 1u);
}

TEST_F(ServiceTest, EnvmapListIsStableUniqueAndComplete) {
    const auto a = service_->envmaps(), b = service_->envmaps();
    EXPECT_EQ(a.body, b.body);
    const auto list = json::parse(a.body);
    ASSERT_EQ(list.size(), 12u);
    std::set<std::string> names;
    for (const auto& e : list) {
        names.insert(e["name"]);
        EXPECT_EQ(e["thumbnail"].get<std::string>().rfind("data:image/png;base64,", 0), 0u);
    }
    EXPECT_EQ(names.size(), 12u);
    EXPECT_EQ(list[0]["name"], "env00");
}

TEST(Thumbnail, ConstantEnvironmentGivesConstantImage) {
    illum::EnvMap env;
    env.pixels = Image(128, 64, 2.5f);
    const auto t = make_thumbnail(env, 64);
    EXPECT_EQ(t.width, 64);
    EXPECT_EQ(t.height, 32);
    for (float v : t.data) EXPECT_EQ(v, t.data[0]);
    EXPECT_GT(t.data[0], 0.0f);
}

TEST(ServerConfig, ReadsEnvironment) {
    setenv("RELIT_BIND", "0.0.0.0:9123", 1);
    setenv("RELIT_CHECKPOINTS", "/tmp/ws", 1);
    setenv("RELIT_TTL", "2.5", 1);
    const auto c = server_config_from_env();
    EXPECT_EQ(c.host, "0.0.0.0");
    EXPECT_EQ(c.port, 9123);
    EXPECT_EQ(c.workspace, fs::path("/tmp/ws"));
    EXPECT_EQ(c.ttl, std::chrono::milliseconds(2500));
    setenv("RELIT_BIND", "nohost", 1);
    EXPECT_THROW(server_config_from_env(), Error);
    setenv("RELIT_BIND", "h:99999", 1);
    EXPECT_THROW(server_config_from_env(), Error);
    unsetenv("RELIT_BIND");
    setenv("RELIT_TTL", "-1", 1);
    EXPECT_THROW(server_config_from_env(), Error);
    unsetenv("RELIT_TTL");
    unsetenv("RELIT_CHECKPOINTS");
    EXPECT_EQ(server_config_from_env().port, 8080);
}

TEST_F(ServiceTest, HttpRoundTrip) {
    HttpServer server(*service_);
    const int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    std::thread loop([&] { server.listen(); });
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);

    const auto health = client.Get("/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);

    const auto created = client.Post("/sessions", R"({"subject":1,"env":"env08","camera":0})", "application/json");
    ASSERT_TRUE(created);
    ASSERT_EQ(created->status, 201);
    EXPECT_TRUE(created->has_header("Server-Timing"));
    EXPECT_EQ(created->get_header_value("Access-Control-Allow-Origin"), "*");
    const std::string id = json::parse(created->body)["session_id"];

    const auto early = client.Get("/sessions/" + id + "/render?env=env09");
    ASSERT_TRUE(early);
    EXPECT_EQ(early->status, 409);
    const auto relit = client.Post("/sessions/" + id + "/relight", env_body("env09"), "application/json");
    ASSERT_TRUE(relit);
    EXPECT_EQ(relit->status, 200);
    const auto frame = client.Get("/sessions/" + id + "/render?env=env09&yaw=10&pitch=5");
    ASSERT_TRUE(frame);
    EXPECT_EQ(frame->status, 200);
    EXPECT_EQ(frame->get_header_value("Content-Type"), "image/png");
    EXPECT_EQ(frame->body, service_->render(id, {{"env", "env09"}, {"yaw", "10"}, {"pitch", "5"}}).body);

    const auto envs = client.Get("/envmaps");
    ASSERT_TRUE(envs);
    EXPECT_EQ(json::parse(envs->body).size(), 12u);
    const auto cfg = client.Get("/config");
    ASSERT_TRUE(cfg);
    EXPECT_EQ(json::parse(cfg->body)["resolution"], 64);
    const auto stats = client.Get("/stats");
    ASSERT_TRUE(stats);
    EXPECT_EQ(json::parse(stats->body)["relight_computations"], 1);
    const auto missing = client.Get("/sessions/ffffffffffffffff/debug");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);

    server.stop();
    loop.join();
}
