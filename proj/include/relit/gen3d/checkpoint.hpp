// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>

namespace relit::gen3d {

inline constexpr int kCheckpointVersion = 1;

/// Container shared by every trained component: a torch archive holding
/// the module's parameters and buffers, optional extra tensors, and a JSON
/// header with version, kind, config and a SHA-256 of the weights.
struct Checkpoint {
    int version = kCheckpointVersion;
    std::string kind;
    nlohmann::json config;
    nlohmann::json info;  ///< free-form training metadata
    std::string weights_sha256;
    std::map<std::string, torch::Tensor> tensors;  ///< module state, "param/..." and "buffer/..."
    std::map<std::string, torch::Tensor> extra;

    /// Copies the stored state into `module`; throws on any missing or
    /// mis-shaped entry.
    void load_into(torch::nn::Module& module) const;
};

/// SHA-256 over the sorted names, shapes and raw bytes of every parameter
/// and buffer.
std::string weights_checksum(const torch::nn::Module& module);

void save_checkpoint(const std::filesystem::path& path, const std::string& kind, const nlohmann::json& config,
                     const torch::nn::Module& module, const std::map<std::string, torch::Tensor>& extra = {},
                     const nlohmann::json& info = nlohmann::json::object());

/// Throws Error(MissingPrerequisite) when the file does not exist and
/// Error(Other) on a wrong kind, version or checksum mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path, const std::string& expected_kind);

/// Reads only the JSON header.
nlohmann::json read_checkpoint_header(const std::filesystem::path& path);

}  // namespace relit::gen3d
