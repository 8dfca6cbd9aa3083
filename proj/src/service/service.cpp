// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/service/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "relit/core/base64.hpp"
#include "relit/core/error.hpp"
#include "relit/core/sha256.hpp"
#include "relit/gen3d/generator.hpp"
#include "relit/illum/envmap.hpp"
#include "relit/io/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace relit::service {

namespace {

Response json_response(int status, const json& body) {
    Response r;
    r.status = status;
    r.body = body.dump();
    return r;
}

Response error_response(int status, const std::string& message, json extra = json::object()) {
    extra["error"] = message;
    return json_response(status, extra);
}

std::string timing(const std::string& stage, double ms) {
    std::ostringstream os;
    os << stage << ";dur=" << std::fixed << std::setprecision(2) << ms;
    return os.str();
}

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::optional<double> number_param(const std::map<std::string, std::string>& q, const std::string& key,
                                   double fallback, std::string& error) {
    const auto it = q.find(key);
    if (it == q.end() || it->second.empty()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0' || !std::isfinite(v)) {
        error = "query parameter '" + key + "' is not a number: " + it->second;
        return std::nullopt;
    }
    return v;
}

std::string tensor_sha(const torch::Tensor& t) {
    if (!t.defined()) return "";
    const auto c = t.detach().to(torch::kFloat32).contiguous();
    return sha256_hex(std::span<const std::byte>(static_cast<const std::byte*>(c.data_ptr()),
                                                 static_cast<std::size_t>(c.numel()) * sizeof(float)));
}

std::string body_of(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

}  // namespace

Image make_thumbnail(const illum::EnvMap& env, int max_width) {
    const Image& src = env.pixels;
    int f = 1;
    while (src.width / f > max_width && src.width % (2 * f) == 0 && src.height % (2 * f) == 0) f *= 2;
    Image small(src.width / f, src.height / f);
    for (int y = 0; y < small.height; ++y)
        for (int x = 0; x < small.width; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0;
                for (int dy = 0; dy < f; ++dy)
                    for (int dx = 0; dx < f; ++dx) acc += src.at(x * f + dx, y * f + dy, c);
                small.at(x, y, c) = static_cast<float>(acc / (f * f));
            }
    return illum::tonemap(small).ldr;
}

json Counters::to_json() const {
    return {{"sessions", sessions},
            {"inversions", inversions},
            {"relight_computations", relight_computations},
            {"relight_cache_hits", relight_cache_hits},
            {"renders", renders},
            {"expired", expired},
            {"max_concurrent_inference", max_concurrent_inference}};
}

struct RelightService::Relit {
    relight::RelightOutput out;
};

struct RelightService::Session {
    std::string id;
    invert::InversionResult inv;
    Clock::time_point created, last_used;
    std::mutex mutex;
    std::map<std::string, std::shared_future<std::shared_ptr<const Relit>>> cache;
};

RelightService::RelightService(ServiceOptions options) : options_(std::move(options)) {}

void RelightService::load(pipeline::Models models, std::vector<EnvEntry> envs, std::optional<stage::Dataset> dataset) {
    if (!models.model || !models.inverter) throw Error("service needs inverter and relighter", ErrorKind::Config);
    std::lock_guard lock(inference_mutex_);
    models_ = std::move(models);
    envs_ = std::move(envs);
    dataset_ = std::move(dataset);
    ready_ = true;
}

bool RelightService::ready() const { return ready_; }

template <class F>
auto RelightService::infer(F&& f) {
    std::lock_guard lock(inference_mutex_);
    const int active = ++active_inference_;
    {
        std::lock_guard c(counter_mutex_);
        counters_.max_concurrent_inference =
            std::max<std::uint64_t>(counters_.max_concurrent_inference, static_cast<std::uint64_t>(active));
    }
    struct Release {
        std::atomic<int>& n;
        ~Release() { --n; }
    } release{active_inference_};
    torch::NoGradGuard ng;
    return f();
}

void RelightService::expire_locked(Clock::time_point now) {
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_used > options_.ttl) {
            tombstones_.insert(it->first);
            it = sessions_.erase(it);
            std::lock_guard c(counter_mutex_);
            ++counters_.expired;
        } else {
            ++it;
        }
    }
}

std::shared_ptr<RelightService::Session> RelightService::find(const std::string& id, Response& error) {
    std::lock_guard lock(store_mutex_);
    const auto now = options_.clock();
    expire_locked(now);
    if (tombstones_.count(id)) {
        error = error_response(410, "session " + id + " expired");
        return nullptr;
    }
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        error = error_response(404, "unknown session " + id);
        return nullptr;
    }
    it->second->last_used = now;
    return it->second;
}

const EnvEntry* RelightService::find_env(const std::string& name) const {
    for (const auto& e : envs_)
        if (e.name == name) return &e;
    return nullptr;
}

Response RelightService::env_not_found(const std::string& name) const {
    json names = json::array();
    for (const auto& e : envs_) names.push_back(e.name);
    return error_response(404, "unknown env '" + name + "'", {{"envs", names}});
}

Response RelightService::create_session(const std::string& content_type, const std::string& body,
                                        const std::map<std::string, std::string>& query) {
    if (!ready_) return error_response(503, "model not loaded");
    const auto& gen = *models_->generator;
    const int res = gen.config().output_res;
    Image image;
    stage::CameraPose pose;
    if (content_type.rfind("application/json", 0) == 0) {
        json j;
        try {
            j = json::parse(body);
        } catch (const std::exception&) {
            return error_response(400, "body is not valid JSON");
        }
        if (!dataset_) return error_response(400, "dataset item references are not available");
        if (!j.contains("subject") || !j.contains("env") || !j.contains("camera") || !j["subject"].is_number_integer() ||
            !j["camera"].is_number_integer() || !j["env"].is_string())
            return error_response(400, "item reference needs integer 'subject', string 'env', integer 'camera'");
        const int s = j["subject"], c = j["camera"];
        const std::string env = j["env"];
        if (s < 0 || s >= dataset_->config().subjects)
            return error_response(404, "unknown subject " + std::to_string(s));
        if (c < 0 || c >= static_cast<int>(dataset_->cameras().size()))
            return error_response(404, "unknown camera " + std::to_string(c));
        const auto& names = dataset_->env_names();
        if (std::find(names.begin(), names.end(), env) == names.end()) return env_not_found(env);
        image = dataset_->relit(s, env, c);
        pose = dataset_->cameras()[static_cast<std::size_t>(c)];
    } else {
        try {
            image = io::decode_png(std::vector<std::uint8_t>(body.begin(), body.end()));
        } catch (const std::exception&) {
            return error_response(400, "body is neither a PNG image nor a JSON item reference");
        }
        if (image.width != res || image.height != res)
            return error_response(400, "image must be " + std::to_string(res) + "x" + std::to_string(res) +
                                           " pixels (got " + std::to_string(image.width) + "x" +
                                           std::to_string(image.height) + ")");
        std::string err;
        const auto yaw = number_param(query, "yaw", 0.0, err);
        const auto pitch = number_param(query, "pitch", 0.0, err);
        if (!yaw || !pitch) return error_response(400, err);
        pose = gen.config().arc.pose(*yaw, *pitch, res, res);
    }

    const auto t0 = Clock::now();
    auto inv = infer([&] {
        const std::vector<stage::CameraPose> poses = {pose};
        return models_->inverter->invert(gen3d::from_image(image), poses);
    });
    const double ms = ms_since(t0);

    auto session = std::make_shared<Session>();
    session->inv = std::move(inv);
    {
        std::lock_guard lock(store_mutex_);
        const auto now = options_.clock();
        expire_locked(now);
        session->id = sha256_hex("relit-session-" + std::to_string(next_id_++)).substr(0, 16);
        session->created = session->last_used = now;
        sessions_[session->id] = session;
    }
    {
        std::lock_guard c(counter_mutex_);
        ++counters_.sessions;
        ++counters_.inversions;
    }
    auto r = json_response(201, {{"session_id", session->id}, {"invert_ms", ms}});
    r.headers["Server-Timing"] = timing("invert", ms);
    r.headers["Location"] = "/sessions/" + session->id;
    return r;
}

Response RelightService::relight(const std::string& id, const std::string& body) {
    if (!ready_) return error_response(503, "model not loaded");
    std::string env;
    try {
        const auto j = json::parse(body);
        env = j.at("env").get<std::string>();
    } catch (const std::exception&) {
        return error_response(400, "body must be JSON {\"env\": name}");
    }
    Response err;
    const auto session = find(id, err);
    if (!session) return err;
    const auto* entry = find_env(env);
    if (!entry) return env_not_found(env);

    std::shared_future<std::shared_ptr<const Relit>> future;
    std::optional<std::promise<std::shared_ptr<const Relit>>> promise;
    {
        std::lock_guard lock(session->mutex);
        const auto it = session->cache.find(env);
        if (it != session->cache.end()) {
            future = it->second;
        } else {
            promise.emplace();
            future = promise->get_future().share();
            session->cache[env] = future;
        }
    }
    const auto t0 = Clock::now();
    const bool computed = promise.has_value();
    if (computed) {
        try {
            auto relit = infer([&] {
                const auto cond = relight::condition_batch(std::vector<illum::LightWeights>{entry->weights});
                return std::make_shared<const Relit>(Relit{models_->model->relight_latent(session->inv, cond)});
            });
            {
                std::lock_guard c(counter_mutex_);
                ++counters_.relight_computations;
            }
            promise->set_value(std::move(relit));
        } catch (...) {
            {
                std::lock_guard lock(session->mutex);
                session->cache.erase(env);
            }
            promise->set_exception(std::current_exception());
        }
    } else {
        std::lock_guard c(counter_mutex_);
        ++counters_.relight_cache_hits;
    }
    try {
        future.get();
    } catch (const std::exception& e) {
        return error_response(500, std::string("relight failed: ") + e.what());
    }
    const double ms = ms_since(t0);
    auto r = json_response(200, {{"status", "ok"}, {"env", env}, {"cached", !computed}});
    r.headers["Server-Timing"] = timing("relight", ms);
    return r;
}

Response RelightService::render(const std::string& id, const std::map<std::string, std::string>& query) {
    if (!ready_) return error_response(503, "model not loaded");
    Response err;
    const auto session = find(id, err);
    if (!session) return err;
    const auto env_it = query.find("env");
    if (env_it == query.end() || env_it->second.empty()) return error_response(400, "query parameter 'env' is required");
    const std::string env = env_it->second;
    if (!find_env(env)) return env_not_found(env);
    std::string msg;
    const auto yaw = number_param(query, "yaw", 0.0, msg);
    const auto pitch = number_param(query, "pitch", 0.0, msg);
    if (!yaw || !pitch) return error_response(400, msg);
    const auto a = query.find("allow_extrapolate");
    const bool allow = a != query.end() && (a->second == "1" || a->second == "true");
    const auto& config = models_->generator->config();
    const bool inside = config.arc.contains(*yaw, *pitch);
    if (!inside && !allow)
        return error_response(422, "pose outside the supported range",
                              {{"yaw_limit", config.arc.yaw_limit_deg}, {"pitch_limit", config.arc.pitch_limit_deg}});

    std::shared_future<std::shared_ptr<const Relit>> future;
    {
        std::lock_guard lock(session->mutex);
        const auto it = session->cache.find(env);
        if (it == session->cache.end())
            return error_response(409, "env '" + env + "' not relit in this session; POST /sessions/" + id +
                                           "/relight first");
        future = it->second;
    }
    std::shared_ptr<const Relit> relit;
    try {
        relit = future.get();
    } catch (const std::exception& e) {
        return error_response(409, std::string("env relight failed: ") + e.what());
    }
    const int res = config.output_res;
    const auto t0 = Clock::now();
    const auto png = infer([&] {
        const std::vector<stage::CameraPose> poses = {config.arc.pose(*yaw, *pitch, res, res)};
        return io::encode_png(gen3d::to_image(models_->model->render(relit->out, poses).image));
    });
    const double ms = ms_since(t0);
    {
        std::lock_guard c(counter_mutex_);
        ++counters_.renders;
    }
    Response r;
    r.content_type = "image/png";
    r.body = body_of(png);
    r.headers["Server-Timing"] = timing("render", ms);
    if (!inside) r.headers["X-Extrapolated-Pose"] = "1";
    return r;
}

Response RelightService::debug(const std::string& id) {
    Response err;
    const auto session = find(id, err);
    if (!session) return err;
    json envs = json::object();
    {
        std::lock_guard lock(session->mutex);
        for (const auto& [name, f] : session->cache) {
            if (f.wait_for(std::chrono::seconds(0)) != std::future_status::ready) continue;
            try {
                const auto v = f.get();
                envs[name] = {{"w_r_sha256", tensor_sha(v->out.w_r)}, {"F_r_sha256", tensor_sha(v->out.F_r)}};
            } catch (const std::exception&) {
            }
        }
    }
    return json_response(200, {{"session_id", id},
                               {"w_s_sha256", tensor_sha(session->inv.w_s)},
                               {"F_s_sha256", tensor_sha(session->inv.F_s)},
                               {"envs", envs}});
}

Response RelightService::envmaps() const {
    json list = json::array();
    for (const auto& e : envs_)
        list.push_back({{"name", e.name},
                        {"thumbnail", "data:image/png;base64," + base64(io::encode_png(e.thumbnail))}});
    return json_response(200, list);
}

Response RelightService::stats() const {
    json j = counters().to_json();
    j["live_sessions"] = live_sessions();
    j["ready"] = ready();
    return json_response(200, j);
}

Response RelightService::describe() const {
    if (!ready_) return error_response(503, "model not loaded");
    const auto& c = models_->generator->config();
    return json_response(200, {{"resolution", c.output_res},
                               {"yaw_limit", c.arc.yaw_limit_deg},
                               {"pitch_limit", c.arc.pitch_limit_deg},
                               {"ttl_seconds", std::chrono::duration<double>(options_.ttl).count()}});
}

Counters RelightService::counters() const {
    std::lock_guard c(counter_mutex_);
    return counters_;
}

std::size_t RelightService::live_sessions() const {
    std::lock_guard lock(store_mutex_);
    return sessions_.size();
}

ServerConfig server_config_from_env(ServerConfig config) {
    if (const char* bind = std::getenv("RELIT_BIND"); bind && *bind) {
        const std::string b = bind;
        const auto colon = b.rfind(':');
        if (colon == std::string::npos) throw Error("RELIT_BIND must be host:port, got '" + b + "'", ErrorKind::Config);
        config.host = b.substr(0, colon);
        try {
            std::size_t used = 0;
            config.port = std::stoi(b.substr(colon + 1), &used);
            if (used != b.size() - colon - 1 || config.port < 0 || config.port > 65535) throw std::out_of_range("");
        } catch (const std::exception&) {
            throw Error("RELIT_BIND has an invalid port: '" + b + "'", ErrorKind::Config);
        }
    }
    if (const char* ck = std::getenv("RELIT_CHECKPOINTS"); ck && *ck) config.workspace = ck;
    if (const char* ttl = std::getenv("RELIT_TTL"); ttl && *ttl) {
        char* end = nullptr;
        const double s = std::strtod(ttl, &end);
        if (end == ttl || *end != '\0' || !(s > 0)) throw Error("RELIT_TTL must be positive seconds", ErrorKind::Config);
        config.ttl = std::chrono::milliseconds(static_cast<std::int64_t>(s * 1000.0));
    }
    return config;
}

std::vector<EnvEntry> load_env_entries(const stage::Dataset& dataset, const fs::path& envmap_dir) {
    std::vector<EnvEntry> out;
    for (const auto& name : dataset.env_names()) {
        EnvEntry e;
        e.name = name;
        e.weights = dataset.weights(name);
        e.thumbnail = make_thumbnail(illum::load_envmap(envmap_dir / (name + ".hdr")));
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace relit::service
