// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <json.hpp>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relit/core/image.hpp"
#include "relit/illum/lighting.hpp"
#include "relit/pipeline/workspace.hpp"
#include "relit/stage/dataset.hpp"

namespace relit::service {

using Clock = std::chrono::steady_clock;

struct EnvEntry {
    std::string name;
    illum::LightWeights weights;
    Image thumbnail;  ///< tone-mapped LDR preview
};

/// Tone-mapped preview of an environment map, box-downsampled so the
/// width is at most `max_width`.
Image make_thumbnail(const illum::EnvMap& env, int max_width = 64);

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

struct Counters {
    std::uint64_t sessions = 0;
    std::uint64_t inversions = 0;
    std::uint64_t relight_computations = 0;
    std::uint64_t relight_cache_hits = 0;
    std::uint64_t renders = 0;
    std::uint64_t expired = 0;
    std::uint64_t max_concurrent_inference = 0;
    nlohmann::json to_json() const;
};

struct ServiceOptions {
    std::chrono::milliseconds ttl = std::chrono::minutes(10);
    std::function<Clock::time_point()> clock = [] { return Clock::now(); };
};

/// Session store and inference lane behind the HTTP API. Every model
/// forward pass runs under one mutex; sessions and their per-env caches are
/// guarded separately so requests for distinct sessions interleave.
class RelightService {
public:
    explicit RelightService(ServiceOptions options = {});

    /// Installs the models and env library; until then session creation
    /// answers 503. `dataset` enables item references.
    void load(pipeline::Models models, std::vector<EnvEntry> envs, std::optional<stage::Dataset> dataset);
    bool ready() const;

    /// POST /sessions. Body is a PNG at model resolution, or JSON
    /// {"subject", "env", "camera"} naming a dataset item. Uploads are
    /// inverted at (yaw, pitch) from `query`, default frontal.
    Response create_session(const std::string& content_type, const std::string& body,
                            const std::map<std::string, std::string>& query);
    /// POST /sessions/{id}/relight with {"env": name}.
    Response relight(const std::string& id, const std::string& body);
    /// GET /sessions/{id}/render?yaw=&pitch=&env=[&allow_extrapolate=1].
    Response render(const std::string& id, const std::map<std::string, std::string>& query);
    /// GET /sessions/{id}/debug: checksums of the session's cached tensors.
    Response debug(const std::string& id);
    /// GET /envmaps.
    Response envmaps() const;
    /// GET /stats.
    Response stats() const;
    /// GET /config: model resolution and pose range.
    Response describe() const;

    Counters counters() const;
    std::size_t live_sessions() const;

private:
    struct Session;
    struct Relit;

    std::shared_ptr<Session> find(const std::string& id, Response& error);
    void expire_locked(Clock::time_point now);
    const EnvEntry* find_env(const std::string& name) const;
    Response env_not_found(const std::string& name) const;
    template <class F>
    auto infer(F&& f);

    ServiceOptions options_;
    mutable std::mutex store_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::set<std::string> tombstones_;
    std::uint64_t next_id_ = 0;

    std::mutex inference_mutex_;
    std::atomic<int> active_inference_{0};

    std::atomic<bool> ready_{false};
    std::optional<pipeline::Models> models_;
    std::vector<EnvEntry> envs_;
    std::optional<stage::Dataset> dataset_;

    mutable std::mutex counter_mutex_;
    Counters counters_;
};

/// Environment configuration of `relit serve`:
/// RELIT_BIND (host:port, default 127.0.0.1:8080), RELIT_CHECKPOINTS
/// (workspace directory), RELIT_TTL (idle seconds, default 600).
struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path workspace;
    std::chrono::milliseconds ttl = std::chrono::minutes(10);
};

ServerConfig server_config_from_env(ServerConfig defaults = {});

/// Env library of a workspace: every env map of the dataset in order.
std::vector<EnvEntry> load_env_entries(const stage::Dataset& dataset, const std::filesystem::path& envmap_dir);

class HttpServer {
public:
    explicit HttpServer(RelightService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds (port 0 picks a free port) and returns the port.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace relit::service
