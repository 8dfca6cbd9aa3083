// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "relit/core/image.hpp"
#include "relit/illum/lighting.hpp"
#include "relit/stage/camera.hpp"
#include "relit/stage/light_rig.hpp"
#include "relit/stage/subject.hpp"

namespace relit::stage {

struct DatasetConfig {
    int subjects = 24;
    int cameras = 8;
    int lights = 24;
    int envs = 12;
    int resolution = 64;
    std::uint64_t seed = 0;      ///< subject i uses generate_subject(seed + i)
    std::uint64_t env_seed = 7;  ///< procedural environment library seed
    int holdout_subjects = 4;    ///< the last subjects are held out for evaluation
    int holdout_envs = 4;        ///< the last environment maps are held out
    CameraArc arc;

    std::string canonical() const;
    std::string hash() const;
};

struct BuildOptions {
    bool resume = false;  ///< continue a partial build instead of refusing
    std::function<void(const std::string&)> log;
};

struct BuildReport {
    int olat_images = 0;
    int relit_images = 0;
    std::uintmax_t bytes = 0;
    bool up_to_date = false;  ///< a complete dataset with the same config already existed
};

/// Renders every OLAT stack, relights it under every environment map and
/// writes the layout
///
///     <data_dir>/subjects/<sid>/olat/<cam>/<light>.exr
///     <data_dir>/subjects/<sid>/relit/<env>/<cam>.png
///     <data_dir>/meta.json
///
/// plus `<envmap_dir>/<env>.hdr` and `<env>.w<N>.json` weight caches.
/// Exposure is shared by all cameras of one (subject, env) pair.
BuildReport build_dataset(const DatasetConfig& config, const std::filesystem::path& data_dir,
                          const std::filesystem::path& envmap_dir, const BuildOptions& options = {});

enum class Split { Train, Eval };

/// Read-only view of a built dataset. Image loads are cached and thread-safe.
class Dataset {
public:
    static Dataset open(const std::filesystem::path& data_dir, const std::filesystem::path& envmap_dir);

    const DatasetConfig& config() const { return config_; }
    const std::vector<CameraPose>& cameras() const { return cameras_; }
    const LightRig& rig() const { return rig_; }
    const std::filesystem::path& root() const { return root_; }

    /// Subject indices (0-based positions, not seeds) of a split.
    std::vector<int> subjects(Split split) const;
    std::vector<std::string> envs(Split split) const;
    const std::vector<std::string>& env_names() const { return env_names_; }
    int env_index(const std::string& name) const;

    const SyntheticSubject& subject(int index) const { return subjects_.at(static_cast<std::size_t>(index)); }
    const illum::LightWeights& weights(const std::string& env) const;
    float exposure(int subject, const std::string& env) const;

    Image relit(int subject, const std::string& env, int camera) const;
    std::vector<Image> olat_stack(int subject, int camera) const;
    std::filesystem::path relit_path(int subject, const std::string& env, int camera) const;
    std::filesystem::path olat_path(int subject, int camera, int light) const;

    const std::map<std::string, std::string>& checksums() const { return checksums_; }

private:
    std::filesystem::path root_;
    DatasetConfig config_;
    std::vector<CameraPose> cameras_;
    LightRig rig_;
    std::vector<SyntheticSubject> subjects_;
    std::vector<std::string> env_names_;
    std::map<std::string, illum::LightWeights> weights_;
    std::map<std::string, float> exposure_;
    std::map<std::string, std::string> checksums_;

    struct Cache {
        std::mutex mutex;
        std::map<std::string, Image> images;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

std::string subject_dir_name(int index);

}  // namespace relit::stage
