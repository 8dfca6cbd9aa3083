// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/stage/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "relit/core/error.hpp"
#include "relit/core/sha256.hpp"
#include "relit/illum/library.hpp"
#include "relit/io/image_io.hpp"
#include "relit/stage/renderer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace relit::stage {
namespace {

constexpr int kMetaVersion = 1;

std::string two_digits(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

json camera_json(const CameraPose& c, int id) {
    json j;
    j["id"] = id;
    std::vector<double> r;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) r.push_back(c.rotation(i, k));
    j["rotation"] = r;
    j["translation"] = {c.translation.x(), c.translation.y(), c.translation.z()};
    j["fx"] = c.fx;
    j["fy"] = c.fy;
    j["cx"] = c.cx;
    j["cy"] = c.cy;
    j["width"] = c.width;
    j["height"] = c.height;
    j["yaw_deg"] = c.yaw_deg();
    j["pitch_deg"] = c.pitch_deg();
    return j;
}

CameraPose camera_from_json(const json& j) {
    CameraPose c;
    const auto r = j.at("rotation").get<std::vector<double>>();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) c.rotation(i, k) = r.at(static_cast<std::size_t>(i * 3 + k));
    const auto t = j.at("translation").get<std::vector<double>>();
    c.translation = {t.at(0), t.at(1), t.at(2)};
    c.fx = j.at("fx");
    c.fy = j.at("fy");
    c.cx = j.at("cx");
    c.cy = j.at("cy");
    c.width = j.at("width");
    c.height = j.at("height");
    return c;
}

json config_json(const DatasetConfig& c) {
    return json{{"subjects", c.subjects},         {"cameras", c.cameras},
                {"lights", c.lights},             {"envs", c.envs},
                {"resolution", c.resolution},     {"seed", c.seed},
                {"env_seed", c.env_seed},         {"holdout_subjects", c.holdout_subjects},
                {"holdout_envs", c.holdout_envs}, {"arc_yaw_deg", c.arc.yaw_limit_deg},
                {"arc_pitch_deg", c.arc.pitch_limit_deg}, {"arc_distance", c.arc.distance},
                {"arc_fov_deg", c.arc.fov_deg}};
}

DatasetConfig config_from_json(const json& j) {
    DatasetConfig c;
    c.subjects = j.at("subjects");
    c.cameras = j.at("cameras");
    c.lights = j.at("lights");
    c.envs = j.at("envs");
    c.resolution = j.at("resolution");
    c.seed = j.at("seed");
    c.env_seed = j.at("env_seed");
    c.holdout_subjects = j.at("holdout_subjects");
    c.holdout_envs = j.at("holdout_envs");
    c.arc.yaw_limit_deg = j.at("arc_yaw_deg");
    c.arc.pitch_limit_deg = j.at("arc_pitch_deg");
    c.arc.distance = j.at("arc_distance");
    c.arc.fov_deg = j.at("arc_fov_deg");
    return c;
}

void write_json(const fs::path& path, const json& j) {
    const std::string text = j.dump(1);
    io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void validate_config(const DatasetConfig& c) {
    auto bad = [](const std::string& m) { throw Error("dataset config: " + m, ErrorKind::Config); };
    if (c.subjects <= 0 || c.cameras <= 0 || c.lights <= 0 || c.envs <= 0 || c.resolution <= 0)
        bad("counts and resolution must be positive");
    if (c.holdout_subjects < 0 || c.holdout_subjects >= c.subjects) bad("holdout_subjects must leave training subjects");
    if (c.holdout_envs < 0 || c.holdout_envs >= c.envs) bad("holdout_envs must leave training envs");
}

}  // namespace

std::string subject_dir_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", index);
    return buf;
}

std::string DatasetConfig::canonical() const { return config_json(*this).dump(); }
std::string DatasetConfig::hash() const { return sha256_hex(canonical()).substr(0, 12); }

BuildReport build_dataset(const DatasetConfig& config, const fs::path& data_dir, const fs::path& envmap_dir,
                          const BuildOptions& options) {
    validate_config(config);
    auto log = [&](const std::string& m) {
        if (options.log) options.log(m);
    };
    BuildReport report;
    const fs::path meta_path = data_dir / "meta.json";
    if (fs::exists(meta_path)) {
        json meta = json::parse(io::read_file(meta_path));
        if (meta.value("complete", false) && meta.value("config_hash", "") == config.hash()) {
            report.up_to_date = true;
            report.olat_images = config.subjects * config.cameras * config.lights;
            report.relit_images = config.subjects * config.cameras * config.envs;
            for (const auto& [rel, sum] : meta.at("files").items()) report.bytes += fs::file_size(data_dir / rel);
            log("dataset at " + data_dir.string() + " is up to date");
            return report;
        }
        throw Error("dataset at " + data_dir.string() + " was built with a different config (hash " +
                        meta.value("config_hash", "?") + "); remove it or choose another output directory",
                    ErrorKind::Config);
    }
    if (fs::exists(data_dir / "subjects") && !options.resume)
        throw Error("partial dataset found at " + (data_dir / "subjects").string() + "; rerun with --resume",
                    ErrorKind::Config);

    const LightRig rig = LightRig::fibonacci(config.lights);
    const auto cameras = config.arc.cameras(config.cameras, config.resolution, config.resolution);
    const auto envs = illum::ensure_library(envmap_dir, config.envs, config.env_seed);
    std::vector<illum::LightWeights> weights;
    json env_meta = json::array();
    for (const auto& env : envs) {
        weights.push_back(illum::downsample_to_weights(env, rig));
        const fs::path wpath = envmap_dir / (env.name + ".w" + std::to_string(config.lights) + ".json");
        illum::save_weights(wpath, weights.back());
        env_meta.push_back({{"name", env.name},
                            {"file", env.name + ".hdr"},
                            {"sha256", sha256_file(envmap_dir / (env.name + ".hdr"))},
                            {"weights_file", wpath.filename().string()}});
    }

    json files = json::object();
    json exposure = json::object();
    json subjects_meta = json::array();
    auto record = [&](const fs::path& path) {
        const auto rel = fs::relative(path, data_dir).generic_string();
        files[rel] = sha256_file(path);
        report.bytes += fs::file_size(path);
    };

    for (int s = 0; s < config.subjects; ++s) {
        const SyntheticSubject subject = generate_subject(config.seed + static_cast<std::uint64_t>(s));
        const fs::path sdir = data_dir / "subjects" / subject_dir_name(s);
        std::vector<std::vector<Image>> stacks;
        for (int c = 0; c < config.cameras; ++c) {
            const GBuffer g = trace(subject, cameras[static_cast<std::size_t>(c)]);
            if (g.empty) log("warning: camera " + std::to_string(c) + " does not see subject " + std::to_string(s));
            std::vector<Image> stack;
            for (int l = 0; l < config.lights; ++l) {
                stack.push_back(render_olat(g, l, rig).image);
                const fs::path p = sdir / "olat" / two_digits(c) / (two_digits(l) + ".exr");
                if (!(options.resume && fs::exists(p))) io::write_exr(p, stack.back());
                record(p);
                ++report.olat_images;
            }
            stacks.push_back(std::move(stack));
        }
        for (std::size_t e = 0; e < envs.size(); ++e) {
            std::vector<Image> radiance;
            for (const auto& stack : stacks) radiance.push_back(illum::relight_ibr(stack, weights[e]));
            const float scale = illum::auto_exposure_scale(radiance);
            exposure[subject_dir_name(s) + "/" + envs[e].name] = scale;
            for (int c = 0; c < config.cameras; ++c) {
                const auto ldr = illum::tonemap(radiance[static_cast<std::size_t>(c)],
                                                {illum::ExposureMode::Fixed, scale});
                const fs::path p = sdir / "relit" / envs[e].name / (two_digits(c) + ".png");
                if (!(options.resume && fs::exists(p))) io::write_png(p, ldr.ldr);
                record(p);
                ++report.relit_images;
            }
        }
        json kp = json::array();
        for (const auto& k : subject.keypoints3d) kp.push_back({k.x(), k.y(), k.z()});
        subjects_meta.push_back({{"index", s}, {"subject_id", subject.subject_id}, {"keypoints3d", kp}});
        log("subject " + std::to_string(s + 1) + "/" + std::to_string(config.subjects) + " rendered");
    }

    json meta;
    meta["version"] = kMetaVersion;
    meta["config"] = config_json(config);
    meta["config_hash"] = config.hash();
    json dirs = json::array();
    for (const auto& d : rig.directions) dirs.push_back({d.x(), d.y(), d.z()});
    meta["rig"] = {{"directions", dirs}, {"intensities", rig.intensities}};
    json cams = json::array();
    for (std::size_t c = 0; c < cameras.size(); ++c) cams.push_back(camera_json(cameras[c], static_cast<int>(c)));
    meta["cameras"] = cams;
    meta["subjects"] = subjects_meta;
    meta["keypoint_names"] = json::array();
    for (int k = 0; k < kKeypointCount; ++k) meta["keypoint_names"].push_back(std::string(keypoint_name(k)));
    meta["envs"] = env_meta;
    meta["exposure"] = {{"policy", "auto_mean_luminance_shared_across_cameras"}, {"target", 0.25}, {"gamma", 2.2},
                        {"scales", exposure}};
    meta["files"] = files;
    meta["complete"] = true;
    write_json(meta_path, meta);
    return report;
}

Dataset Dataset::open(const fs::path& data_dir, const fs::path& envmap_dir) {
    const fs::path meta_path = data_dir / "meta.json";
    if (!fs::exists(meta_path)) throw Error("dataset manifest not found: " + meta_path.string(), ErrorKind::MissingPrerequisite);
    const json meta = json::parse(io::read_file(meta_path));
    if (!meta.value("complete", false)) throw Error("dataset at " + data_dir.string() + " is incomplete");

    Dataset d;
    d.root_ = data_dir;
    d.config_ = config_from_json(meta.at("config"));
    for (const auto& c : meta.at("cameras")) d.cameras_.push_back(camera_from_json(c));
    for (const auto& dir : meta.at("rig").at("directions")) d.rig_.directions.emplace_back(dir[0], dir[1], dir[2]);
    d.rig_.intensities = meta.at("rig").at("intensities").get<std::vector<double>>();
    for (int s = 0; s < d.config_.subjects; ++s)
        d.subjects_.push_back(generate_subject(d.config_.seed + static_cast<std::uint64_t>(s)));
    for (const auto& e : meta.at("envs")) {
        const std::string name = e.at("name");
        d.env_names_.push_back(name);
        d.weights_[name] = illum::load_weights(envmap_dir / e.at("weights_file").get<std::string>(), name);
    }
    for (const auto& [k, v] : meta.at("exposure").at("scales").items()) d.exposure_[k] = v.get<float>();
    for (const auto& [k, v] : meta.at("files").items()) d.checksums_[k] = v.get<std::string>();
    return d;
}

std::vector<int> Dataset::subjects(Split split) const {
    std::vector<int> out;
    const int train = config_.subjects - config_.holdout_subjects;
    for (int s = 0; s < config_.subjects; ++s)
        if ((split == Split::Train) == (s < train)) out.push_back(s);
    return out;
}

std::vector<std::string> Dataset::envs(Split split) const {
    std::vector<std::string> out;
    const int train = config_.envs - config_.holdout_envs;
    for (int e = 0; e < static_cast<int>(env_names_.size()); ++e)
        if ((split == Split::Train) == (e < train)) out.push_back(env_names_[static_cast<std::size_t>(e)]);
    return out;
}

int Dataset::env_index(const std::string& name) const {
    for (std::size_t i = 0; i < env_names_.size(); ++i)
        if (env_names_[i] == name) return static_cast<int>(i);
    throw Error("unknown environment map '" + name + "'", ErrorKind::UnknownResource);
}

const illum::LightWeights& Dataset::weights(const std::string& env) const {
    auto it = weights_.find(env);
    if (it == weights_.end()) throw Error("unknown environment map '" + env + "'", ErrorKind::UnknownResource);
    return it->second;
}

float Dataset::exposure(int subject, const std::string& env) const {
    return exposure_.at(subject_dir_name(subject) + "/" + env);
}

fs::path Dataset::relit_path(int subject, const std::string& env, int camera) const {
    return root_ / "subjects" / subject_dir_name(subject) / "relit" / env / (two_digits(camera) + ".png");
}

fs::path Dataset::olat_path(int subject, int camera, int light) const {
    return root_ / "subjects" / subject_dir_name(subject) / "olat" / two_digits(camera) / (two_digits(light) + ".exr");
}

Image Dataset::relit(int subject, const std::string& env, int camera) const {
    const fs::path p = relit_path(subject, env, camera);
    const std::string key = p.string();
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->images.find(key); it != cache_->images.end()) return it->second;
    }
    Image img = io::read_png(p);
    std::lock_guard lock(cache_->mutex);
    cache_->images.emplace(key, img);
    return img;
}

std::vector<Image> Dataset::olat_stack(int subject, int camera) const {
    std::vector<Image> out;
    for (int l = 0; l < config_.lights; ++l) out.push_back(io::read_exr(olat_path(subject, camera, l)));
    return out;
}

}  // namespace relit::stage
