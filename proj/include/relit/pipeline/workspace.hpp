// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relit/eval/evaluate.hpp"
#include "relit/invert/inverter.hpp"
#include "relit/pipeline/settings.hpp"
#include "relit/relight/relighter.hpp"
#include "relit/stage/dataset.hpp"
#include "relit/train/relighter_train.hpp"

namespace relit::pipeline {

using Logger = std::function<void(const nlohmann::json&)>;

/// Every trained component, loaded from checkpoints.
struct Models {
    gen3d::Generator generator{nullptr};
    invert::Encoder encoder{nullptr};
    invert::Afa afa{nullptr};
    relight::Relighter relighter{nullptr};
    std::optional<invert::Inverter> inverter;
    std::optional<relight::RelightModel> model;
    std::map<std::string, std::string> checksums;  ///< component -> weights SHA-256
};

/// One relighter training configuration of the ablation harness.
struct Variant {
    std::string name;
    int views = 2;
    int subjects = 0;  ///< leading training subjects used; 0 means all
    relight::FeatureMode mode = relight::FeatureMode::Manipulate;
    double lambda_lpips = 1.0;
};

struct AblationRow {
    Variant variant;
    bool ok = false;
    std::string error;
    eval::Aggregate relit, copy_input;
    nlohmann::json to_json() const;
};

struct AblationReport {
    std::string config_hash;
    std::vector<AblationRow> rows;
    const AblationRow* find(const std::string& name) const;
    std::string to_jsonl() const;
    std::string summary_text() const;
    std::vector<std::filesystem::path> write(const std::filesystem::path& dir) const;
};

struct BenchReport {
    double invert_ms = 0, relight_ms = 0, render_ms = 0;
    double render_fps = 0;
    int frames = 0;
    nlohmann::json to_json() const;
    std::string summary_text() const;
};

/// A working directory holding the dataset, checkpoints, logs and reports
/// of one configuration:
///
///     <root>/data, <root>/envmaps
///     <root>/checkpoints/{generator,encoder,afa,relighter}.ckpt
///     <root>/ablations/<variant>/relighter.ckpt
///     <root>/logs/<stage>.jsonl, <root>/reports, <root>/runs
class Workspace {
public:
    Workspace(std::filesystem::path root, Settings settings);

    const Settings& settings() const { return settings_; }
    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path data_dir() const { return root_ / "data"; }
    std::filesystem::path envmap_dir() const { return root_ / "envmaps"; }
    std::filesystem::path checkpoint(const std::string& component) const;
    std::filesystem::path variant_checkpoint(const Variant& v) const;
    std::filesystem::path log_path(const std::string& stage) const { return root_ / "logs" / (stage + ".jsonl"); }
    std::filesystem::path reports_dir() const { return root_ / "reports"; }
    std::filesystem::path runs_dir() const { return root_ / "runs"; }

    stage::BuildReport gen_data(bool resume, const std::function<void(const std::string&)>& log = {});
    /// Throws MissingPrerequisite when no complete dataset exists.
    stage::Dataset dataset() const;

    /// Stage runners. With `resume`, a stage whose checkpoint was produced by
    /// the same stage configuration is left alone. Return a JSON summary.
    nlohmann::json train_generator(bool resume, const Logger& log = {});
    nlohmann::json train_inversion(bool resume, const Logger& log = {});
    nlohmann::json train_relighter(const Variant& variant, bool resume, const Logger& log = {});
    nlohmann::json train_relighter(bool resume, const Logger& log = {}) {
        return train_relighter(main_variant(), resume, log);
    }

    /// The variant described by the relight.* settings.
    Variant main_variant() const;
    /// Full, w/o F-space, w/o LPIPS, then every ablate.views and
    /// ablate.subjects entry.
    std::vector<Variant> ablation_variants() const;

    /// Loads generator, encoder and AFA, plus the relighter of `variant`
    /// when given. Missing checkpoints raise MissingPrerequisite.
    Models load(const std::optional<Variant>& variant) const;
    Models load() const { return load(main_variant()); }

    eval::EvalReport evaluate(Models& models, const std::string& name) const;
    AblationReport ablate(bool resume, const Logger& log = {});
    BenchReport bench(Models& models) const;

    /// True when the checkpoint exists and records `stage_hash`.
    static bool up_to_date(const std::filesystem::path& checkpoint, const std::string& stage_hash);

private:
    std::string stage_hash(const std::string& stage, const Variant* variant = nullptr) const;
    void require(const std::filesystem::path& checkpoint, const std::string& what) const;

    std::filesystem::path root_;
    Settings settings_;
};

}  // namespace relit::pipeline
