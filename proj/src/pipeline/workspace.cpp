// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/pipeline/workspace.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "relit/core/error.hpp"
#include "relit/core/sha256.hpp"
#include "relit/gen3d/checkpoint.hpp"
#include "relit/gen3d/pretrain.hpp"
#include "relit/invert/train.hpp"
#include "relit/io/image_io.hpp"
#include "relit/train/data.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace relit::pipeline {

namespace {

void write_text(const fs::path& path, const std::string& text) {
    io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

/// Appends each record as one JSON line, flushing per record.
class JsonlSink {
public:
    JsonlSink(const fs::path& path, Logger forward) : forward_(std::move(forward)) {
        fs::create_directories(path.parent_path());
        out_.open(path, std::ios::app);
        if (!out_) throw IoError(path.string(), "cannot open log for writing");
    }
    void operator()(const json& j) {
        out_ << j.dump() << "\n";
        out_.flush();
        if (forward_) forward_(j);
    }

private:
    std::ofstream out_;
    Logger forward_;
};

std::vector<int> leading(const std::vector<int>& v, int n) {
    if (n <= 0 || n >= static_cast<int>(v.size())) return v;
    return {v.begin(), v.begin() + n};
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

json AblationRow::to_json() const {
    json j = {{"variant", variant.name},
              {"views", variant.views},
              {"subjects", variant.subjects},
              {"feature_mode", relight::to_string(variant.mode)},
              {"lambda_lpips", variant.lambda_lpips},
              {"ok", ok}};
    if (ok) {
        j["relit"] = relit.to_json();
        j["copy_input"] = copy_input.to_json();
    } else {
        j["error"] = error;
    }
    return j;
}

const AblationRow* AblationReport::find(const std::string& name) const {
    for (const auto& r : rows)
        if (r.variant.name == name) return &r;
    return nullptr;
}

std::string AblationReport::to_jsonl() const {
    std::string out;
    for (const auto& r : rows) out += r.to_json().dump() + "\n";
    return out;
}

std::string AblationReport::summary_text() const {
    std::ostringstream os;
    os << "ablations  config " << config_hash << "\n";
    os << std::left << std::setw(14) << "variant" << std::right << std::setw(8) << "PSNR" << std::setw(9) << "SSIM"
       << std::setw(8) << "LD" << std::setw(12) << "copy PSNR" << "\n"
       << std::fixed;
    for (const auto& r : rows) {
        os << std::left << std::setw(14) << r.variant.name << std::right;
        if (!r.ok) {
            os << "  failed: " << r.error << "\n";
            continue;
        }
        os << std::setw(8) << std::setprecision(2) << r.relit.psnr << std::setw(9) << std::setprecision(4)
           << r.relit.ssim << std::setw(8) << std::setprecision(3) << r.relit.ld << std::setw(12)
           << std::setprecision(2) << r.copy_input.psnr << "\n";
    }
    return os.str();
}

std::vector<fs::path> AblationReport::write(const fs::path& dir) const {
    const auto stem = (dir / ("ablation-" + config_hash)).string();
    write_text(stem + ".jsonl", to_jsonl());
    write_text(stem + ".txt", summary_text());
    return {stem + ".jsonl", stem + ".txt"};
}

json BenchReport::to_json() const {
    return {{"invert_ms", invert_ms},
            {"relight_ms", relight_ms},
            {"render_ms", render_ms},
            {"render_fps", render_fps},
            {"frames", frames}};
}

std::string BenchReport::summary_text() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << "invert   " << invert_ms << " ms\n"
       << "relight  " << relight_ms << " ms\n"
       << "render   " << render_ms << " ms (" << std::setprecision(1) << render_fps << " fps, cached latent)\n";
    return os.str();
}

Workspace::Workspace(fs::path root, Settings settings) : root_(std::move(root)), settings_(std::move(settings)) {}

fs::path Workspace::checkpoint(const std::string& component) const {
    return root_ / "checkpoints" / (component + ".ckpt");
}

fs::path Workspace::variant_checkpoint(const Variant& v) const {
    if (stage_hash("relight", &v) == stage_hash("relight")) return checkpoint("relighter");
    return root_ / "ablations" / v.name / "relighter.ckpt";
}

std::string Workspace::stage_hash(const std::string& stage, const Variant* variant) const {
    std::vector<std::string> prefixes = {"data.", "arc.", "gen."};
    if (stage == "inversion" || stage == "relight") prefixes.push_back("invert.");
    std::istringstream is(settings_.text);
    std::string line, kept;
    const std::vector<std::string> variant_keys = {"relight.views", "relight.feature_mode", "relight.lambda_lpips"};
    while (std::getline(is, line)) {
        bool keep = false;
        for (const auto& p : prefixes) keep = keep || line.rfind(p, 0) == 0;
        if (stage == "relight" && line.rfind("relight.", 0) == 0) {
            keep = true;
            for (const auto& k : variant_keys) keep = keep && line.rfind(k + " ", 0) != 0;
        }
        if (keep) kept += line + "\n";
    }
    if (stage == "relight") {
        const Variant v = variant ? *variant : main_variant();
        kept += "variant.views = " + std::to_string(v.views) + "\n";
        kept += "variant.subjects = " + std::to_string(v.subjects) + "\n";
        kept += "variant.mode = " + relight::to_string(v.mode) + "\n";
        std::ostringstream l;
        l << std::setprecision(17) << v.lambda_lpips;
        kept += "variant.lambda_lpips = " + l.str() + "\n";
    }
    return sha256_hex(kept).substr(0, 12);
}

bool Workspace::up_to_date(const fs::path& checkpoint, const std::string& stage_hash) {
    if (!fs::exists(checkpoint)) return false;
    try {
        const auto header = gen3d::read_checkpoint_header(checkpoint);
        return header.at("info").value("stage_hash", "") == stage_hash;
    } catch (const std::exception&) {
        return false;
    }
}

void Workspace::require(const fs::path& checkpoint, const std::string& what) const {
    if (!fs::exists(checkpoint))
        throw Error("missing " + what + " checkpoint: " + checkpoint.string(), ErrorKind::MissingPrerequisite);
}

stage::BuildReport Workspace::gen_data(bool resume, const std::function<void(const std::string&)>& log) {
    stage::BuildOptions options;
    options.resume = resume;
    options.log = log;
    return stage::build_dataset(settings_.data, data_dir(), envmap_dir(), options);
}

stage::Dataset Workspace::dataset() const {
    auto d = stage::Dataset::open(data_dir(), envmap_dir());
    if (d.config().hash() != settings_.data.hash())
        throw Error("dataset at " + data_dir().string() + " was built from a different data.* configuration",
                    ErrorKind::Config);
    return d;
}

json Workspace::train_generator(bool resume, const Logger& log) {
    const auto path = checkpoint("generator");
    const auto hash = stage_hash("generator");
    if (resume && up_to_date(path, hash)) return {{"stage", "generator"}, {"skipped", "up to date"}};
    const auto data = dataset();
    const train::ImageBank bank(data, data.subjects(stage::Split::Train), data.envs(stage::Split::Train));
    gen3d::Generator gen(settings_.generator, settings_.pretrain.seed);
    JsonlSink sink(log_path("generator"), log);
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = gen3d::pretrain_generator(gen, bank, settings_.pretrain, std::ref(sink));
    const json info = {{"stage_hash", hash},
                       {"steps", result.steps},
                       {"train_psnr", result.final_psnr},
                       {"keys", result.keys},
                       {"seconds", elapsed_ms(t0) / 1000.0}};
    gen3d::save_checkpoint(path, "generator", settings_.generator.to_json(), *gen, {{"latents", result.latents}}, info);
    json summary = {{"stage", "generator"}, {"train_psnr", result.final_psnr}, {"checkpoint", path.string()}};
    sink(summary);
    return summary;
}

json Workspace::train_inversion(bool resume, const Logger& log) {
    require(checkpoint("generator"), "generator");
    const auto hash = stage_hash("inversion");
    if (resume && up_to_date(checkpoint("encoder"), hash) && up_to_date(checkpoint("afa"), hash))
        return {{"stage", "inversion"}, {"skipped", "up to date"}};
    const auto gck = gen3d::load_checkpoint(checkpoint("generator"), "generator");
    const auto gconfig = gen3d::GeneratorConfig::from_json(gck.config);
    gen3d::Generator gen(gconfig);
    gck.load_into(*gen);
    const auto& latents = gck.extra.at("latents");

    const auto data = dataset();
    const train::ImageBank bank(data, data.subjects(stage::Split::Train), data.envs(stage::Split::Train));
    const train::ImageBank validation(data, data.subjects(stage::Split::Eval), data.envs(stage::Split::Train));
    invert::Encoder enc(gconfig, latents.mean(0), settings_.inversion.seed);
    invert::Afa afa(gconfig, settings_.inversion.seed + 1);
    invert::Inverter inverter(gen, enc, afa);
    JsonlSink sink(log_path("inversion"), log);
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = invert::train_inversion(inverter, bank, latents, validation, settings_.inversion, std::ref(sink));
    json info = report.to_json();
    info["stage_hash"] = hash;
    info["generator_sha256"] = gck.weights_sha256;
    info["seconds"] = elapsed_ms(t0) / 1000.0;
    gen3d::save_checkpoint(checkpoint("encoder"), "encoder", gconfig.to_json(), *enc, {}, info);
    gen3d::save_checkpoint(checkpoint("afa"), "afa", gconfig.to_json(), *afa, {}, info);
    json summary = {{"stage", "inversion"}, {"report", report.to_json()}};
    sink(summary);
    return summary;
}

Variant Workspace::main_variant() const {
    Variant v;
    v.name = "full";
    v.views = settings_.views;
    v.mode = settings_.mode;
    v.lambda_lpips = settings_.relight.weights.perceptual;
    return v;
}

std::vector<Variant> Workspace::ablation_variants() const {
    const Variant full = main_variant();
    std::vector<Variant> out = {full};
    Variant nof = full;
    nof.name = "no_fspace";
    nof.mode = relight::FeatureMode::Direct;
    out.push_back(nof);
    Variant nol = full;
    nol.name = "no_lpips";
    nol.lambda_lpips = 0.0;
    out.push_back(nol);
    for (int v : settings_.ablate_views) {
        Variant x = full;
        x.name = "views_" + std::to_string(v);
        x.views = v;
        out.push_back(x);
    }
    const int n_train = settings_.data.subjects - settings_.data.holdout_subjects;
    for (int s : settings_.ablate_subjects) {
        Variant x = full;
        x.name = "subjects_" + std::to_string(s);
        x.subjects = s == n_train ? 0 : s;
        out.push_back(x);
    }
    return out;
}

json Workspace::train_relighter(const Variant& variant, bool resume, const Logger& log) {
    require(checkpoint("generator"), "generator");
    require(checkpoint("encoder"), "encoder");
    require(checkpoint("afa"), "AFA");
    const auto path = variant_checkpoint(variant);
    const auto hash = stage_hash("relight", &variant);
    if (resume && up_to_date(path, hash)) return {{"stage", "relight"}, {"variant", variant.name}, {"skipped", "up to date"}};

    auto models = load(std::nullopt);
    models.relighter = relight::Relighter(models.generator->config(), settings_.relighter, settings_.relight.seed);
    relight::RelightModel model(models.generator, models.relighter, variant.mode);

    const auto data = dataset();
    const auto subjects = leading(data.subjects(stage::Split::Train), variant.subjects);
    const train::ImageBank bank(data, subjects, data.envs(stage::Split::Train));
    const train::ImageBank validation(data, data.subjects(stage::Split::Eval), data.envs(stage::Split::Train));

    train::TrainConfig config = settings_.relight;
    config.weights.perceptual = variant.lambda_lpips;
    train::RelighterTrainOptions options;
    options.cameras = settings_.train_cameras(variant.views);
    fs::create_directories(path.parent_path());
    options.state_path = fs::path(path.string() + ".state");
    const auto stage_name = variant.name == "full" ? std::string("relight") : "relight-" + variant.name;
    JsonlSink sink(log_path(stage_name), log);
    options.log = std::ref(sink);

    // A state file from a different configuration is not resumable.
    const auto state_tag = fs::path(path.string() + ".state.hash");
    if (fs::exists(*options.state_path)) {
        std::string tag;
        if (fs::exists(state_tag)) {
            const auto b = io::read_file(state_tag);
            tag.assign(b.begin(), b.end());
        }
        if (!resume || tag != hash) fs::remove(*options.state_path);
    }
    write_text(state_tag, hash);

    const auto report = train::train_relighter(model, *models.inverter, bank, validation, config, options);
    json info = report.to_json();
    info["stage_hash"] = hash;
    info["variant"] = variant.name;
    info["cameras"] = options.cameras;
    info["feature_mode"] = relight::to_string(variant.mode);
    info["lambda_lpips"] = variant.lambda_lpips;
    json cfg = settings_.relighter.to_json();
    cfg["feature_mode"] = relight::to_string(variant.mode);
    gen3d::save_checkpoint(path, "relighter", cfg, *models.relighter, {}, info);
    fs::remove(*options.state_path);
    fs::remove(state_tag);
    json summary = {{"stage", "relight"}, {"variant", variant.name}, {"report", report.to_json()}};
    sink(summary);
    return summary;
}

Models Workspace::load(const std::optional<Variant>& variant) const {
    require(checkpoint("generator"), "generator");
    require(checkpoint("encoder"), "encoder");
    require(checkpoint("afa"), "AFA");
    Models m;
    const auto gck = gen3d::load_checkpoint(checkpoint("generator"), "generator");
    const auto gconfig = gen3d::GeneratorConfig::from_json(gck.config);
    m.generator = gen3d::Generator(gconfig);
    gck.load_into(*m.generator);
    m.checksums["generator"] = gck.weights_sha256;

    const auto eck = gen3d::load_checkpoint(checkpoint("encoder"), "encoder");
    m.encoder = invert::Encoder(gconfig, torch::zeros({gconfig.latent_layers, gconfig.latent_dim}));
    eck.load_into(*m.encoder);
    m.checksums["encoder"] = eck.weights_sha256;

    const auto ack = gen3d::load_checkpoint(checkpoint("afa"), "afa");
    m.afa = invert::Afa(gconfig);
    ack.load_into(*m.afa);
    m.checksums["afa"] = ack.weights_sha256;

    for (auto* mod : std::initializer_list<torch::nn::Module*>{m.generator.get(), m.encoder.get(), m.afa.get()}) {
        mod->eval();
        for (auto& p : mod->parameters()) p.set_requires_grad(false);
    }
    m.inverter.emplace(m.generator, m.encoder, m.afa);

    if (variant) {
        const auto path = variant_checkpoint(*variant);
        require(path, "relighter (" + variant->name + ")");
        const auto rck = gen3d::load_checkpoint(path, "relighter");
        const auto rconfig = relight::RelighterConfig::from_json(rck.config);
        m.relighter = relight::Relighter(gconfig, rconfig);
        rck.load_into(*m.relighter);
        m.relighter->eval();
        for (auto& p : m.relighter->parameters()) p.set_requires_grad(false);
        m.checksums["relighter"] = rck.weights_sha256;
        m.model.emplace(m.generator, m.relighter,
                        relight::feature_mode_from_string(rck.config.value("feature_mode", "manipulate")));
    }
    return m;
}

eval::EvalReport Workspace::evaluate(Models& models, const std::string& name) const {
    if (!models.model) throw Error("evaluation needs a relighter", ErrorKind::MissingPrerequisite);
    const auto data = dataset();
    const auto split = eval::default_split(data, settings_.train_cameras());
    eval::TemplateMatchOptions match;
    match.search_window = settings_.eval_window;
    auto report = eval::evaluate(*models.model, *models.inverter, data, split, match);
    report.name = name;
    report.config_hash = settings_.hash;
    report.checkpoints = models.checksums;
    return report;
}

AblationReport Workspace::ablate(bool resume, const Logger& log) {
    AblationReport out;
    out.config_hash = settings_.hash;
    for (const auto& v : ablation_variants()) {
        AblationRow row;
        row.variant = v;
        try {
            train_relighter(v, resume, log);
            auto models = load(v);
            const auto report = evaluate(models, "eval-" + v.name);
            row.relit = report.summary.at(eval::kMethodRelit);
            row.copy_input = report.summary.at(eval::kMethodCopyInput);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        if (log) log({{"stage", "ablate"}, {"row", row.to_json()}});
        out.rows.push_back(row);
    }
    return out;
}

BenchReport Workspace::bench(Models& models) const {
    if (!models.model) throw Error("bench needs a relighter", ErrorKind::MissingPrerequisite);
    torch::NoGradGuard ng;
    const auto data = dataset();
    const int subject = data.subjects(stage::Split::Eval).front();
    const auto envs = data.envs(stage::Split::Eval);
    const int cam = settings_.train_cameras().front();
    const std::vector<stage::CameraPose> pose = {data.cameras()[static_cast<std::size_t>(cam)]};
    const auto image = gen3d::from_image(data.relit(subject, envs.front(), cam));
    const auto cond = relight::condition_batch(std::vector<illum::LightWeights>{data.weights(envs.back())});
    const auto& arc = settings_.generator.arc;
    const int n = settings_.bench_frames;

    BenchReport r;
    r.frames = n;
    auto inv = models.inverter->invert(image, pose);
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < n; ++i) inv = models.inverter->invert(image, pose);
    r.invert_ms = elapsed_ms(t0) / n;

    auto relit = models.model->relight_latent(inv, cond);
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < n; ++i) relit = models.model->relight_latent(inv, cond);
    r.relight_ms = elapsed_ms(t0) / n;

    const int res = settings_.generator.output_res;
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < n; ++i) {
        const double yaw = -arc.yaw_limit_deg + 2.0 * arc.yaw_limit_deg * i / std::max(1, n - 1);
        const std::vector<stage::CameraPose> p = {arc.pose(yaw, 0.0, res, res)};
        models.model->render(relit, p);
    }
    r.render_ms = elapsed_ms(t0) / n;
    r.render_fps = 1000.0 / r.render_ms;
    return r;
}

}  // namespace relit::pipeline
