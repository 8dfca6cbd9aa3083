// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/eval/evaluate.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "relit/core/error.hpp"
#include "relit/gen3d/generator.hpp"
#include "relit/io/image_io.hpp"

namespace fs = std::filesystem;

namespace relit::eval {

EvalSplit default_split(const stage::Dataset& dataset, const std::vector<int>& train_cameras) {
    EvalSplit split;
    split.subjects = dataset.subjects(stage::Split::Eval);
    split.envs = dataset.envs(stage::Split::Eval);
    for (int c = 0; c < static_cast<int>(dataset.cameras().size()); ++c)
        if (std::find(train_cameras.begin(), train_cameras.end(), c) == train_cameras.end()) split.cameras.push_back(c);
    return split;
}

nlohmann::json EvalRecord::to_json() const {
    nlohmann::json j = {{"method", method},         {"subject", subject}, {"source_env", source_env},
                        {"target_env", target_env}, {"camera", camera}};
    if (skipped) {
        j["skipped"] = true;
        j["reason"] = reason;
    } else {
        j["psnr"] = psnr;
        j["ssim"] = ssim;
        j["ld"] = ld;
    }
    return j;
}

nlohmann::json Aggregate::to_json() const { return {{"count", count}, {"psnr", psnr}, {"ssim", ssim}, {"ld", ld}}; }

std::map<std::string, Aggregate> EvalReport::aggregate(const std::vector<EvalRecord>& records) {
    std::map<std::string, Aggregate> out;
    for (const auto& r : records) {
        if (r.skipped) continue;
        auto& a = out[r.method];
        ++a.count;
        a.psnr += r.psnr;
        a.ssim += r.ssim;
        a.ld += r.ld;
    }
    for (auto& [_, a] : out) {
        a.psnr /= a.count;
        a.ssim /= a.count;
        a.ld /= a.count;
    }
    return out;
}

std::string EvalReport::to_jsonl() const {
    std::string out;
    for (const auto& r : records) out += r.to_json().dump() + "\n";
    nlohmann::json s = {{"summary", true}, {"name", name}, {"config_hash", config_hash}, {"checkpoints", checkpoints}};
    for (const auto& [m, a] : summary) s["methods"][m] = a.to_json();
    out += s.dump() + "\n";
    return out;
}

std::string EvalReport::summary_text() const {
    std::ostringstream os;
    os << name << "  config " << config_hash << "\n";
    os << std::left << std::setw(12) << "method" << std::right << std::setw(7) << "items" << std::setw(10) << "PSNR"
       << std::setw(9) << "SSIM" << std::setw(9) << "LD" << "\n";
    os << std::fixed;
    for (const auto& [m, a] : summary)
        os << std::left << std::setw(12) << m << std::right << std::setw(7) << a.count << std::setw(10)
           << std::setprecision(2) << a.psnr << std::setw(9) << std::setprecision(4) << a.ssim << std::setw(9)
           << std::setprecision(3) << a.ld << "\n";
    const auto skipped = std::count_if(records.begin(), records.end(), [](const EvalRecord& r) { return r.skipped; });
    if (skipped > 0) os << "skipped " << skipped << " records\n";
    return os.str();
}

std::vector<fs::path> EvalReport::write(const fs::path& dir) const {
    const auto stem = dir / (name + "-" + config_hash);
    auto put = [](const fs::path& p, const std::string& text) {
        io::write_file(p, std::vector<std::uint8_t>(text.begin(), text.end()));
        return p;
    };
    return {put(fs::path(stem.string() + ".jsonl"), to_jsonl()), put(fs::path(stem.string() + ".txt"), summary_text())};
}

EvalReport EvalReport::read(const fs::path& jsonl) {
    const auto bytes = io::read_file(jsonl);
    std::istringstream is(std::string(bytes.begin(), bytes.end()));
    EvalReport report;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        if (j.value("summary", false)) {
            report.name = j.at("name");
            report.config_hash = j.at("config_hash");
            report.checkpoints = j.at("checkpoints").get<std::map<std::string, std::string>>();
            continue;
        }
        EvalRecord r;
        r.method = j.at("method");
        r.subject = j.at("subject");
        r.source_env = j.at("source_env");
        r.target_env = j.at("target_env");
        r.camera = j.at("camera");
        r.skipped = j.value("skipped", false);
        r.reason = j.value("reason", "");
        r.psnr = j.value("psnr", 0.0);
        r.ssim = j.value("ssim", 0.0);
        r.ld = j.value("ld", 0.0);
        report.records.push_back(r);
    }
    report.summary = aggregate(report.records);
    return report;
}

EvalReport evaluate(relight::RelightModel& model, invert::Inverter& inverter, const stage::Dataset& dataset,
                    const EvalSplit& split, const TemplateMatchOptions& match) {
    if (split.envs.size() < 2) throw Error("evaluation needs at least two held-out envs", ErrorKind::Config);
    torch::NoGradGuard ng;
    EvalReport report;
    const auto n_env = split.envs.size();
    for (int s : split.subjects) {
        const auto& subject = dataset.subject(s);
        for (std::size_t ei = 0; ei < n_env; ++ei) {
            const auto& target_env = split.envs[ei];
            const auto& source_env = split.envs[(ei + 1) % n_env];
            std::vector<Image> sources, targets;
            std::vector<stage::CameraPose> poses;
            std::vector<int> cams;
            for (int c : split.cameras) {
                EvalRecord base{kMethodRelit, s, source_env, target_env, c};
                if (!fs::exists(dataset.relit_path(s, source_env, c)) || !fs::exists(dataset.relit_path(s, target_env, c))) {
                    base.skipped = true;
                    base.reason = "missing ground truth";
                    report.records.push_back(base);
                    base.method = kMethodCopyInput;
                    report.records.push_back(base);
                    continue;
                }
                sources.push_back(dataset.relit(s, source_env, c));
                targets.push_back(dataset.relit(s, target_env, c));
                poses.push_back(dataset.cameras()[static_cast<std::size_t>(c)]);
                cams.push_back(c);
            }
            if (cams.empty()) continue;
            const auto inv = inverter.invert(gen3d::from_images(sources), poses);
            const std::vector<illum::LightWeights> cond(cams.size(), dataset.weights(target_env));
            const auto out = model.relight_full(inv, relight::condition_batch(cond), poses);
            for (std::size_t i = 0; i < cams.size(); ++i) {
                const auto pred = gen3d::to_image(out.image[static_cast<std::int64_t>(i)]);
                const auto& pose = poses[i];
                EvalRecord r{kMethodRelit, s, source_env, target_env, cams[i]};
                r.psnr = psnr(pred, targets[i]);
                r.ssim = ssim(pred, targets[i]);
                r.ld = image_landmark_distance(pred, targets[i], subject, pose, match);
                report.records.push_back(r);
                EvalRecord b{kMethodCopyInput, s, source_env, target_env, cams[i]};
                b.psnr = psnr(sources[i], targets[i]);
                b.ssim = ssim(sources[i], targets[i]);
                b.ld = image_landmark_distance(sources[i], targets[i], subject, pose, match);
                report.records.push_back(b);
            }
        }
    }
    report.summary = EvalReport::aggregate(report.records);
    return report;
}

}  // namespace relit::eval
