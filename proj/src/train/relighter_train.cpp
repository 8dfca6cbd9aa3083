// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/train/relighter_train.hpp"

#include <chrono>
#include <cmath>

#include "relit/core/error.hpp"
#include "relit/gen3d/checkpoint.hpp"

namespace fs = std::filesystem;

namespace relit::train {

void TrainConfig::validate() const {
    if (weights.latent < 0 || weights.reconstruction < 0 || weights.perceptual < 0)
        throw Error("loss weights must be non-negative", ErrorKind::Config);
    if (lr <= 0 || batch < 1 || steps < 0 || validate_every < 1 || checkpoint_every < 1 || validation_pairs < 1)
        throw Error("invalid relighter training config", ErrorKind::Config);
}

InversionCache::InversionCache(invert::Inverter& inverter, const ImageBank& bank, const std::vector<int>& cameras) {
    torch::NoGradGuard ng;
    const int S = static_cast<int>(bank.subjects().size()), E = static_cast<int>(bank.envs().size());
    for (int s = 0; s < S; ++s)
        for (int c : cameras) {
            std::vector<int> ss(E, s), es(E), cs(E, c);
            for (int e = 0; e < E; ++e) es[e] = e;
            const std::vector<stage::CameraPose> poses(E, bank.poses()[static_cast<std::size_t>(c)]);
            const auto inv = inverter.invert(bank.gather(ss, es, cs), poses);
            for (int e = 0; e < E; ++e) items_[{s, e, c}] = {inv.w_s[e].clone(), inv.F_s[e].clone(), inv.G_k_s[e].clone()};
        }
}

const CachedInversion& InversionCache::at(int subject_slot, int env_slot, int camera) const {
    const auto it = items_.find({subject_slot, env_slot, camera});
    if (it == items_.end()) throw Error("inversion cache has no entry for the requested image");
    return it->second;
}

nlohmann::json LossValues::to_json() const {
    return {{"L_lat", latent}, {"L_C", reconstruction}, {"L_LPIPS", perceptual}, {"total", total}};
}

nlohmann::json RelighterTrainReport::to_json() const {
    return {{"validation_start", validation_start.to_json()},
            {"validation_end", validation_end.to_json()},
            {"frozen_before", frozen_before},
            {"frozen_after", frozen_after},
            {"steps", steps},
            {"resumed_from", resumed_from},
            {"seconds", seconds}};
}

LossParts relight_losses(relight::RelightModel& model, PerceptualExtractor& perceptual, const InversionCache& cache,
                         const ImageBank& bank, std::span<const PairIndex> pairs) {
    std::vector<torch::Tensor> w, f, g, wt;
    std::vector<int> ts, te, tc;
    std::vector<stage::CameraPose> poses;
    std::vector<illum::LightWeights> cond;
    for (const auto& p : pairs) {
        const auto& src = cache.at(p.subject_slot, p.source_env, p.camera);
        w.push_back(src.w);
        f.push_back(src.F);
        g.push_back(src.G_k);
        wt.push_back(cache.at(p.subject_slot, p.target_env, p.camera).w);
        ts.push_back(p.subject_slot);
        te.push_back(p.target_env);
        tc.push_back(p.camera);
        poses.push_back(bank.poses()[static_cast<std::size_t>(p.camera)]);
        cond.push_back(bank.weights(p.target_env));
    }
    invert::InversionResult inv;
    inv.w_s = torch::stack(w);
    inv.F_s = torch::stack(f);
    inv.G_k_s = torch::stack(g);
    const auto relit = model.relight_latent(inv, relight::condition_batch(cond));
    const auto image = model.render(relit, poses).image;
    const auto target = bank.gather(ts, te, tc);
    LossParts parts;
    parts.latent = loss_latent(relit.w_r, torch::stack(wt));
    parts.reconstruction = loss_reconstruction(image, target);
    parts.perceptual = perceptual->distance(image, target);
    return parts;
}

namespace {

LossValues values_of(const LossParts& parts, const LossWeights& w) {
    LossValues v;
    v.latent = parts.latent.item<double>();
    v.reconstruction = parts.reconstruction.item<double>();
    v.perceptual = parts.perceptual.item<double>();
    v.total = loss_total(parts, w).item<double>();
    return v;
}

LossValues validate(relight::RelightModel& model, PerceptualExtractor& perceptual, const InversionCache& cache,
                    const ImageBank& bank, const std::vector<PairIndex>& pairs, const LossWeights& w) {
    torch::NoGradGuard ng;
    LossValues sum;
    int n = 0;
    for (std::size_t i = 0; i < pairs.size(); i += 8) {
        const std::span<const PairIndex> chunk(pairs.data() + i, std::min<std::size_t>(8, pairs.size() - i));
        const auto v = values_of(relight_losses(model, perceptual, cache, bank, chunk), w);
        const double k = static_cast<double>(chunk.size());
        sum.latent += v.latent * k;
        sum.reconstruction += v.reconstruction * k;
        sum.perceptual += v.perceptual * k;
        sum.total += v.total * k;
        n += static_cast<int>(chunk.size());
    }
    sum.latent /= n;
    sum.reconstruction /= n;
    sum.perceptual /= n;
    sum.total /= n;
    return sum;
}

std::map<std::string, std::string> frozen_checksums(relight::RelightModel& model, invert::Inverter& inverter) {
    return {{"generator", gen3d::weights_checksum(*model.generator())},
            {"encoder", gen3d::weights_checksum(*inverter.encoder())},
            {"afa", gen3d::weights_checksum(*inverter.afa())}};
}

}  // namespace

RelighterTrainReport train_relighter(relight::RelightModel& model, invert::Inverter& inverter, const ImageBank& bank,
                                     const ImageBank& validation, const TrainConfig& config,
                                     const RelighterTrainOptions& options) {
    config.validate();
    if (options.cameras.empty()) throw Error("train_relighter: no training cameras", ErrorKind::Config);
    const auto t0 = std::chrono::steady_clock::now();
    for (auto* m : std::initializer_list<torch::nn::Module*>{model.generator().get(), inverter.encoder().get(),
                                                            inverter.afa().get()}) {
        m->eval();
        for (auto& p : m->parameters()) p.set_requires_grad(false);
    }
    RelighterTrainReport report;
    report.frozen_before = frozen_checksums(model, inverter);

    const InversionCache cache(inverter, bank, options.cameras);
    std::vector<int> val_cameras;
    for (int c = 0; c < validation.cameras(); ++c) val_cameras.push_back(c);
    PairSampler val_sampler(static_cast<int>(validation.subjects().size()), val_cameras,
                            static_cast<int>(validation.envs().size()), 0x7a1);
    const auto val_pairs = val_sampler.next_batch(config.validation_pairs);
    std::vector<int> used_cameras;
    for (const auto& p : val_pairs) used_cameras.push_back(p.camera);
    std::sort(used_cameras.begin(), used_cameras.end());
    used_cameras.erase(std::unique(used_cameras.begin(), used_cameras.end()), used_cameras.end());
    const InversionCache val_cache(inverter, validation, used_cameras);

    PerceptualExtractor perceptual;
    auto& relighter = model.relighter();
    torch::optim::Adam opt(relighter->parameters(), torch::optim::AdamOptions(config.lr));
    PairSampler sampler(static_cast<int>(bank.subjects().size()), options.cameras,
                        static_cast<int>(bank.envs().size()), config.seed);

    int start = 0;
    if (options.state_path && fs::exists(*options.state_path)) {
        torch::serialize::InputArchive archive;
        archive.load_from(options.state_path->string());
        c10::IValue step;
        archive.read("step", step);
        start = static_cast<int>(step.toInt());
        torch::serialize::InputArchive module_archive, opt_archive;
        archive.read("relighter", module_archive);
        archive.read("optimizer", opt_archive);
        relighter->load(module_archive);
        opt.load(opt_archive);
        for (int s = 0; s < start; ++s) sampler.next_batch(config.batch);
        report.resumed_from = start;
    }
    auto save_state = [&](int step) {
        if (!options.state_path) return;
        torch::serialize::OutputArchive archive, module_archive, opt_archive;
        archive.write("step", c10::IValue(static_cast<std::int64_t>(step)));
        relighter->save(module_archive);
        opt.save(opt_archive);
        archive.write("relighter", module_archive);
        archive.write("optimizer", opt_archive);
        const auto tmp = options.state_path->string() + ".tmp";
        archive.save_to(tmp);
        fs::rename(tmp, *options.state_path);
    };

    report.validation_start = validate(model, perceptual, val_cache, validation, val_pairs, config.weights);
    if (options.log)
        options.log({{"stage", "relight"}, {"step", start}, {"validation", report.validation_start.to_json()}});
    relighter->train();
    for (int step = start; step < config.steps; ++step) {
        const auto pairs = sampler.next_batch(config.batch);
        const auto parts = relight_losses(model, perceptual, cache, bank, pairs);
        const auto loss = loss_total(parts, config.weights);
        const auto v = values_of(parts, config.weights);
        if (!std::isfinite(v.total)) throw Error("relighter training diverged at step " + std::to_string(step));
        opt.zero_grad();
        loss.backward();
        opt.step();
        nlohmann::json rec = {{"stage", "relight"}, {"step", step}};
        rec.update(v.to_json());
        if ((step + 1) % config.validate_every == 0 || step + 1 == config.steps) {
            relighter->eval();
            rec["validation"] = validate(model, perceptual, val_cache, validation, val_pairs, config.weights).to_json();
            relighter->train();
        }
        if (options.log) options.log(rec);
        if ((step + 1) % config.checkpoint_every == 0) save_state(step + 1);
    }
    relighter->eval();
    report.validation_end = validate(model, perceptual, val_cache, validation, val_pairs, config.weights);
    report.frozen_after = frozen_checksums(model, inverter);
    report.steps = config.steps;
    save_state(config.steps);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace relit::train
