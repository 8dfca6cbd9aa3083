// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "relit/eval/metrics.hpp"
#include "relit/invert/inverter.hpp"
#include "relit/relight/relighter.hpp"
#include "relit/stage/dataset.hpp"

namespace relit::eval {

/// Held-out items: every (subject, target env, camera). The source image of
/// an item is the same subject and camera under the next env of the list.
struct EvalSplit {
    std::vector<int> subjects;
    std::vector<std::string> envs;
    std::vector<int> cameras;
};

/// Held-out subjects and envs of the dataset and every camera not used for
/// relighter training.
EvalSplit default_split(const stage::Dataset& dataset, const std::vector<int>& train_cameras);

inline const std::string kMethodRelit = "relit";
inline const std::string kMethodCopyInput = "copy_input";

struct EvalRecord {
    std::string method;
    int subject = 0;
    std::string source_env, target_env;
    int camera = 0;
    bool skipped = false;
    std::string reason;
    double psnr = 0, ssim = 0, ld = 0;
    nlohmann::json to_json() const;
};

struct Aggregate {
    int count = 0;
    double psnr = 0, ssim = 0, ld = 0;
    nlohmann::json to_json() const;
};

struct EvalReport {
    std::string name;
    std::string config_hash;
    std::map<std::string, std::string> checkpoints;
    std::vector<EvalRecord> records;
    std::map<std::string, Aggregate> summary;

    /// Means per method over non-skipped records.
    static std::map<std::string, Aggregate> aggregate(const std::vector<EvalRecord>& records);
    std::string to_jsonl() const;
    std::string summary_text() const;
    /// Writes `<name>-<config_hash>.jsonl` and `.txt` into `dir`.
    std::vector<std::filesystem::path> write(const std::filesystem::path& dir) const;
    static EvalReport read(const std::filesystem::path& jsonl);
};

/// Relights every item of the split and scores it against the exact
/// ground truth, alongside the copy-input baseline (source vs target).
EvalReport evaluate(relight::RelightModel& model, invert::Inverter& inverter, const stage::Dataset& dataset,
                    const EvalSplit& split, const TemplateMatchOptions& match = {});

}  // namespace relit::eval
