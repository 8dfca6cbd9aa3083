// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/service/service.hpp"

#include <httplib.h>

#include "relit/core/error.hpp"

namespace relit::service {

namespace {

std::map<std::string, std::string> params_of(const httplib::Request& req) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : req.params) out.emplace(k, v);
    return out;
}

void send(httplib::Response& res, const Response& r) {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Expose-Headers", "Server-Timing, X-Extrapolated-Pose");
    res.set_content(r.body, r.content_type);
}

}  // namespace

struct HttpServer::Impl {
    explicit Impl(RelightService& s) : service(s) {}
    RelightService& service;
    httplib::Server server;
};

HttpServer::HttpServer(RelightService& service) : impl_(std::make_unique<Impl>(service)) {
    auto& s = impl_->server;
    auto& svc = impl_->service;
    s.set_payload_max_length(16 << 20);
    s.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.create_session(req.get_header_value("Content-Type"), req.body, params_of(req)));
    });
    s.Post(R"(/sessions/([^/]+)/relight)", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.relight(req.matches[1], req.body));
    });
    s.Get(R"(/sessions/([^/]+)/render)", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.render(req.matches[1], params_of(req)));
    });
    s.Get(R"(/sessions/([^/]+)/debug)", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.debug(req.matches[1]));
    });
    s.Get("/envmaps", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.envmaps()); });
    s.Get("/stats", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.stats()); });
    s.Get("/config", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.describe()); });
    s.Get("/health", [&svc](const httplib::Request&, httplib::Response& res) {
        Response r;
        r.status = svc.ready() ? 200 : 503;
        r.body = svc.ready() ? R"({"status":"ok"})" : R"({"status":"loading"})";
        send(res, r);
    });
    s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int p = impl_->server.bind_to_any_port(host);
        if (p < 0) throw Error("cannot bind " + host, ErrorKind::Other);
        return p;
    }
    if (!impl_->server.bind_to_port(host, port))
        throw Error("cannot bind " + host + ":" + std::to_string(port), ErrorKind::Other);
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace relit::service
