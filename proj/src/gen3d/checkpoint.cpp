// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/gen3d/checkpoint.hpp"

#include "relit/core/error.hpp"
#include "relit/core/sha256.hpp"

namespace fs = std::filesystem;

namespace relit::gen3d {

namespace {

constexpr const char* kHeaderKey = "__header__";

std::map<std::string, torch::Tensor> module_state(const torch::nn::Module& module) {
    std::map<std::string, torch::Tensor> out;
    for (const auto& p : module.named_parameters(true)) out["param/" + p.key()] = p.value();
    for (const auto& b : module.named_buffers(true)) out["buffer/" + b.key()] = b.value();
    return out;
}

std::string checksum(const std::map<std::string, torch::Tensor>& state) {
    Sha256 h;
    for (const auto& [name, t] : state) {
        const auto c = t.detach().to(torch::kCPU).contiguous();
        h.update(name);
        h.update(c10::str(c.sizes(), c.dtype()));
        h.update(std::span<const std::byte>(static_cast<const std::byte*>(c.data_ptr()), c.nbytes()));
    }
    return h.hex();
}

}  // namespace

std::string weights_checksum(const torch::nn::Module& module) { return checksum(module_state(module)); }

void save_checkpoint(const fs::path& path, const std::string& kind, const nlohmann::json& config,
                     const torch::nn::Module& module, const std::map<std::string, torch::Tensor>& extra,
                     const nlohmann::json& info) {
    const auto state = module_state(module);
    const nlohmann::json header = {{"version", kCheckpointVersion},
                                   {"kind", kind},
                                   {"config", config},
                                   {"info", info},
                                   {"weights_sha256", checksum(state)}};
    torch::serialize::OutputArchive archive;
    archive.write(kHeaderKey, c10::IValue(header.dump()));
    for (const auto& [name, t] : state) archive.write(name, t.detach().clone());
    for (const auto& [name, t] : extra) archive.write("extra/" + name, t.detach().clone());
    std::error_code ec;
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + ".tmp";
    try {
        archive.save_to(tmp.string());
    } catch (const c10::Error& e) {
        throw IoError(path.string(), "cannot write checkpoint");
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError(path.string(), "cannot write checkpoint: " + ec.message());
}

namespace {

torch::serialize::InputArchive open_archive(const fs::path& path) {
    if (!fs::exists(path))
        throw Error("missing checkpoint: " + path.string(), ErrorKind::MissingPrerequisite);
    torch::serialize::InputArchive archive;
    try {
        archive.load_from(path.string());
    } catch (const c10::Error&) {
        throw IoError(path.string(), "not a readable checkpoint");
    }
    return archive;
}

nlohmann::json header_of(torch::serialize::InputArchive& archive, const fs::path& path) {
    c10::IValue v;
    if (!archive.try_read(kHeaderKey, v) || !v.isString()) throw IoError(path.string(), "checkpoint has no header");
    return nlohmann::json::parse(v.toStringRef());
}

}  // namespace

nlohmann::json read_checkpoint_header(const fs::path& path) {
    auto archive = open_archive(path);
    return header_of(archive, path);
}

Checkpoint load_checkpoint(const fs::path& path, const std::string& expected_kind) {
    auto archive = open_archive(path);
    const auto header = header_of(archive, path);
    Checkpoint ck;
    ck.version = header.at("version");
    ck.kind = header.at("kind");
    ck.config = header.at("config");
    ck.info = header.value("info", nlohmann::json::object());
    ck.weights_sha256 = header.at("weights_sha256");
    if (ck.version != kCheckpointVersion)
        throw Error(path.string() + ": unsupported checkpoint version " + std::to_string(ck.version));
    if (ck.kind != expected_kind)
        throw Error(path.string() + ": expected a '" + expected_kind + "' checkpoint, found '" + ck.kind + "'");
    for (const auto& key : archive.keys()) {
        if (key == kHeaderKey) continue;
        torch::Tensor t;
        archive.read(key, t);
        if (key.rfind("extra/", 0) == 0)
            ck.extra[key.substr(6)] = t;
        else
            ck.tensors[key] = t;
    }
    if (checksum(ck.tensors) != ck.weights_sha256) throw Error(path.string() + ": weight checksum mismatch");
    return ck;
}

void Checkpoint::load_into(torch::nn::Module& module) const {
    torch::NoGradGuard ng;
    auto state = module_state(module);
    if (state.size() != tensors.size())
        throw Error("checkpoint '" + kind + "' holds " + std::to_string(tensors.size()) + " tensors, module has " +
                    std::to_string(state.size()));
    for (auto& [name, dst] : state) {
        const auto it = tensors.find(name);
        if (it == tensors.end()) throw Error("checkpoint '" + kind + "' lacks " + name);
        if (it->second.sizes() != dst.sizes()) throw Error("checkpoint '" + kind + "' shape mismatch for " + name);
        dst.copy_(it->second);
    }
}

}  // namespace relit::gen3d
