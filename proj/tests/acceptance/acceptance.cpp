// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "relit/core/error.hpp"
#include "relit/core/rng.hpp"
#include "relit/core/runtime.hpp"
#include "relit/eval/metrics.hpp"
#include "relit/gen3d/generator.hpp"
#include "relit/illum/envmap.hpp"
#include "relit/illum/lighting.hpp"
#include "relit/io/kvconfig.hpp"
#include "relit/pipeline/settings.hpp"
#include "relit/pipeline/workspace.hpp"
#include "relit/relight/relighter.hpp"
#include "relit/stage/camera.hpp"
#include "relit/stage/light_rig.hpp"
#include "relit/stage/renderer.hpp"
#include "relit/stage/subject.hpp"
#include "relit/train/losses.hpp"

using namespace relit;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

// Pinned tolerances.
constexpr double kSuperpositionRelErr = 1e-5;
constexpr double kSuperpositionSeconds = 120;
constexpr double kConstantWeightTol = 1e-5;
constexpr double kConstantSumTol = 1e-4;
constexpr double kRotationTol = 1e-3;
constexpr double kGradientTol = 1e-3;
constexpr double kPsnrGainDb = 3.0;
constexpr double kMaxLd = 4.0;
constexpr double kMaxViewSpread = 0.15;
constexpr double kMinRenderFps = 5.0;
constexpr double kPsnrOffsetDb = 0.01;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double relative_error(const Image& a, const Image& b) {
    double scale = 0, err = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        scale = std::max(scale, std::abs(double(b.data[i])));
        err = std::max(err, std::abs(double(a.data[i]) - double(b.data[i])));
    }
    return scale > 0 ? err / scale : err;
}

torch::Tensor drand(std::vector<std::int64_t> shape, std::uint64_t seed) {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    return torch::rand(shape, gen, torch::kDouble);
}

Outcome superposition() {
    const auto start = std::chrono::steady_clock::now();
    const auto rig = stage::LightRig::fibonacci(24);
    const stage::CameraArc arc;
    SplitMix64 rng(101);
    double worst = 0;
    int cases = 0;
    for (int s = 0; s < 5; ++s) {
        const auto subject = stage::generate_subject(1000 + s);
        for (double yaw : {-30.0, 0.0, 25.0}) {
            const auto pose = arc.pose(yaw, yaw / 3, 64, 64);
            std::vector<Image> olat;
            for (int i = 0; i < rig.size(); ++i) olat.push_back(stage::render_olat(subject, pose, i, rig).image);
            for (int t = 0; t < 10; ++t) {
                illum::LightWeights w;
                w.env_name = "random";
                w.weights.resize(24);
                for (auto& rgb : w.weights)
                    for (float& c : rgb) c = static_cast<float>(rng.uniform(0, 2));
                const auto ibr = illum::relight_ibr(olat, w);
                const auto direct = stage::render_direct(subject, pose, rig, w.weights).image;
                worst = std::max(worst, relative_error(ibr, direct));
                ++cases;
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst < kSuperpositionRelErr && secs < kSuperpositionSeconds,
            fmt("%d cases, max rel err %.3g, %.1f s", cases, worst, secs)};
}

illum::EnvMap smooth_env(std::uint64_t seed, int h = 32) {
    SplitMix64 rng(seed);
    illum::EnvMap e;
    e.name = "smooth";
    e.pixels = Image(2 * h, h);
    Eigen::Vector3d lobe(rng.normal(), rng.normal(), rng.normal());
    lobe.normalize();
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < 2 * h; ++u) {
            const double c = illum::texel_direction(u, v, 2 * h, h).dot(lobe);
            for (int ch = 0; ch < 3; ++ch)
                e.pixels.at(u, v, ch) = static_cast<float>(0.2 + (ch + 1) * std::exp(4.0 * (c - 1.0)));
        }
    return e;
}

Outcome downsampling() {
    const auto rig = stage::LightRig::fibonacci(24);
    double const_err = 0, sum_err = 0, rot_err = 0;
    for (float c : {0.25f, 1.0f, 3.5f}) {
        illum::EnvMap e;
        e.name = "const";
        e.pixels = Image(64, 32, c);
        const auto w = illum::downsample_to_weights(e, rig);
        double sum = 0;
        for (const auto& rgb : w.weights) {
            for (float x : rgb) const_err = std::max(const_err, std::abs(x - c * 4 * pi / 24));
            sum += rgb[0];
        }
        sum_err = std::max(sum_err, std::abs(sum - 4 * pi * c));
    }
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto env = smooth_env(seed);
        for (int k : {1, 5, 16, 40}) {
            const auto a = illum::downsample_to_weights(env.rotated_columns(k), rig);
            const auto b = illum::downsample_to_weights(env, rig.rotated_yaw(-2 * pi * k / env.width()));
            for (int i = 0; i < 24; ++i)
                for (int ch = 0; ch < 3; ++ch)
                    rot_err = std::max(rot_err, double(std::abs(a.weights[i][ch] - b.weights[i][ch])));
        }
    }
    return {const_err < kConstantWeightTol && sum_err < kConstantSumTol && rot_err < kRotationTol,
            fmt("constant err %.3g, sum err %.3g, rotation err %.3g", const_err, sum_err, rot_err)};
}

Outcome identities(pipeline::Models& m, const pipeline::Workspace& ws) {
    torch::NoGradGuard ng;
    const auto ds = ws.dataset();
    const auto subjects = ds.subjects(stage::Split::Eval);
    const auto envs = ds.envs(stage::Split::Eval);
    auto& gen = m.generator;
    auto& model = *m.model;
    bool ok = true;
    float manip_err = 0, offset_err = 0;
    int checked = 0;
    for (std::size_t i = 0; i < std::min<std::size_t>(subjects.size(), 3); ++i) {
        const int s = subjects[i];
        const int cam = static_cast<int>(i) % static_cast<int>(ds.cameras().size());
        const auto& pose = ds.cameras()[static_cast<std::size_t>(cam)];
        const std::vector src{pose};
        const auto img = gen3d::from_image(ds.relit(s, envs[i % envs.size()], cam));
        const auto inv = m.inverter->invert(img, src);

        const auto own = gen->render(inv.w_s, src);
        ok &= torch::equal(own.image, gen->render(inv.w_s, src, own.feature).image);

        const auto back = relight::manipulate_features(inv.F_s, inv.G_k_s, inv.G_k_s);
        const float bound = 4 * std::numeric_limits<float>::epsilon() *
                            (inv.F_s.abs() + inv.G_k_s.abs()).max().item<float>();
        const float e = (back - inv.F_s).abs().max().item<float>();
        manip_err = std::max(manip_err, e);
        ok &= e <= bound;

        ok &= torch::equal(relight::apply_offset(inv.w_s, torch::zeros_like(inv.w_s)), inv.w_s);
        const auto d = torch::randn_like(inv.w_s);
        offset_err = std::max(offset_err,
                              (relight::apply_offset(relight::apply_offset(inv.w_s, d), -d) - inv.w_s).abs().max().item<float>());

        const std::vector target{ds.weights(envs[(i + 1) % envs.size()])};
        const auto relit = model.relight_latent(inv, relight::condition_batch(target));
        const auto w_r = relit.w_r.clone(), F_r = relit.F_r.clone();
        for (double yaw : {-40.0, 0.0, 40.0}) {
            const std::vector p{gen->config().arc.pose(yaw, 0, gen->config().render_res, gen->config().render_res)};
            model.render(relit, p);
        }
        ok &= torch::equal(relit.w_r, w_r) && torch::equal(relit.F_r, F_r);
        ++checked;
    }
    ok &= offset_err <= 1e-6f && checked > 0;
    return {ok, fmt("%d inversions, manipulate err %.3g, offset round trip %.3g", checked, manip_err, offset_err)};
}

Outcome gradients() {
    train::PerceptualExtractor p;
    double worst = 0;
    const auto target = drand({1, 3, 8, 8}, 11);
    worst = std::max(worst, train::gradient_check(
                                [&](const torch::Tensor& x) { return train::loss_reconstruction(x, target); },
                                drand({1, 3, 8, 8}, 12)));
    const auto wt = drand({2, 8, 4}, 13);
    worst = std::max(worst, train::gradient_check(
                                [&](const torch::Tensor& x) { return train::loss_latent(x, wt); }, drand({2, 8, 4}, 14)));
    worst = std::max(worst, train::gradient_check([&](const torch::Tensor& x) { return p->distance(x, target); },
                                                  drand({1, 3, 8, 8}, 15)));
    const auto base = drand({1, 3, 8, 8}, 16);
    const auto w = drand({1, 8, 6}, 17), w_t = drand({1, 8, 6}, 18);
    auto total = [&](const torch::Tensor& t) {
        const auto image = base * (1 + 0.1 * t.sum());
        return train::loss_total(
            {train::loss_latent(w + t, w_t), train::loss_reconstruction(image, target), p->distance(image, target)}, {});
    };
    worst = std::max(worst, train::gradient_check(total, drand({6}, 19)));
    return {worst < kGradientTol, fmt("max relative gradient error %.3g", worst)};
}

Outcome evaluation(const eval::EvalReport& rep) {
    const auto& relit = rep.summary.at("relit");
    const auto& copy = rep.summary.at("copy_input");
    const double gain = relit.psnr - copy.psnr;
    return {gain >= kPsnrGainDb && relit.ld < kMaxLd && relit.count > 0,
            fmt("%d pairs, relit %.2f dB vs copy-input %.2f dB (+%.2f), SSIM %.3f, LD %.2f px", relit.count, relit.psnr,
                copy.psnr, gain, relit.ssim, relit.ld)};
}

Outcome ablation_order(const pipeline::AblationReport& rep) {
    const auto* full = rep.find("full");
    const auto* no_f = rep.find("no_fspace");
    const auto* no_l = rep.find("no_lpips");
    if (!full || !no_f || !no_l || !full->ok || !no_f->ok || !no_l->ok) return {false, "missing ablation rows"};
    return {full->relit.ld <= no_f->relit.ld && full->relit.ld <= no_l->relit.ld,
            fmt("LD full %.3f, no_fspace %.3f, no_lpips %.3f", full->relit.ld, no_f->relit.ld, no_l->relit.ld)};
}

Outcome view_spread(const pipeline::AblationReport& rep, const std::vector<int>& views) {
    std::vector<eval::Aggregate> aggs;
    for (int v : views) {
        const auto* row = rep.find("views_" + std::to_string(v));
        if (!row || !row->ok) return {false, fmt("missing views_%d", v)};
        aggs.push_back(row->relit);
    }
    auto spread = [&](auto get) {
        double lo = 1e300, hi = -1e300, sum = 0;
        for (const auto& a : aggs) {
            lo = std::min(lo, get(a));
            hi = std::max(hi, get(a));
            sum += get(a);
        }
        return (hi - lo) / (sum / aggs.size());
    };
    const double sp = spread([](const eval::Aggregate& a) { return a.psnr; });
    const double ss = spread([](const eval::Aggregate& a) { return a.ssim; });
    const double sl = spread([](const eval::Aggregate& a) { return a.ld; });
    return {sp < kMaxViewSpread && ss < kMaxViewSpread && sl < kMaxViewSpread,
            fmt("relative spread PSNR %.3f, SSIM %.3f, LD %.3f over %zu view counts", sp, ss, sl, aggs.size())};
}

Outcome benchmark(const pipeline::BenchReport& b) {
    return {b.render_fps >= kMinRenderFps && b.invert_ms > 0 && b.relight_ms > 0 && b.render_ms > 0,
            fmt("invert %.1f ms, relight %.2f ms, render %.1f ms (%.1f fps)", b.invert_ms, b.relight_ms, b.render_ms,
                b.render_fps)};
}

Outcome metrics() {
    Image a(32, 32, 0.4f), b(32, 32, 0.5f);
    const double p = eval::psnr(a, b);
    SplitMix64 rng(5);
    Image c(32, 32), d(32, 32);
    for (auto& x : c.data) x = static_cast<float>(rng.uniform());
    for (auto& x : d.data) x = static_cast<float>(rng.uniform());
    const double s_same = eval::ssim(c, c);
    const double s_ab = eval::ssim(c, d), s_ba = eval::ssim(d, c);
    const std::vector<eval::Keypoint2> k0{{Eigen::Vector2d(10, 10), true}, {Eigen::Vector2d(20, 5), true}};
    const std::vector<eval::Keypoint2> k1{{Eigen::Vector2d(13, 14), true}, {Eigen::Vector2d(23, 9), true}};
    const double ld = eval::landmark_distance(k1, k0);
    const bool ok = std::abs(p - 20.0) < kPsnrOffsetDb && std::abs(s_same - 1.0) < 1e-9 &&
                    std::abs(s_ab - s_ba) < 1e-9 && s_ab < 1.0 && std::abs(ld - 5.0) < 1e-12 &&
                    eval::landmark_distance(k0, k0) == 0.0;
    return {ok, fmt("psnr(0.1 offset) %.4f, ssim(x,x) %.6f, ssim symmetric %.2g, LD(3-4 shift) %.6f", p, s_same,
                    std::abs(s_ab - s_ba), ld)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relit acceptance checks"};
    std::string workdir = "work/toy", config;
    app.add_option("-w,--workdir", workdir, "workspace trained by the checks (resumed when present)");
    app.add_option("-c,--config", config, "configuration file")->required();
    CLI11_PARSE(app, argc, argv);

    init_runtime();
    std::vector<std::pair<std::string, Outcome>> results;
    auto run = [&](const std::string& name, const std::function<Outcome()>& f) {
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        results.emplace_back(name, o);
    };

    run("1 light superposition", superposition);
    run("2 environment downsampling", downsampling);

    auto cfg = pipeline::default_config();
    cfg.load_file(config);
    pipeline::Workspace ws(workdir, pipeline::settings_from(cfg));
    std::optional<pipeline::Models> models;
    std::optional<eval::EvalReport> report;
    std::optional<pipeline::AblationReport> ablation;
    std::string setup_error;
    try {
        ws.gen_data(true);
        ws.train_generator(true);
        ws.train_inversion(true);
        ws.train_relighter(true);
        models = ws.load();
        report = ws.evaluate(*models, "acceptance");
        ablation = ws.ablate(true);
    } catch (const std::exception& e) {
        setup_error = e.what();
    }
    auto need = [&](bool have, auto f) -> std::function<Outcome()> {
        return [=, &setup_error] { return have ? f() : Outcome{false, "pipeline failed: " + setup_error}; };
    };

    run("3 feature identities", need(models.has_value(), [&] { return identities(*models, ws); }));
    run("4 loss gradients", gradients);
    run("5 relighting quality", need(report.has_value(), [&] { return evaluation(*report); }));
    run("6 ablation ordering", need(ablation.has_value(), [&] { return ablation_order(*ablation); }));
    run("7 view-count robustness",
        need(ablation.has_value(), [&] { return view_spread(*ablation, ws.settings().ablate_views); }));
    run("8 interactive rendering", need(models.has_value(), [&] { return benchmark(ws.bench(*models)); }));
    run("9 metric closed forms", metrics);

    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.second.pass; });
    std::printf("%zu/%zu criteria passed\n", results.size() - failed, results.size());
    return failed == 0 ? 0 : 1;
}
