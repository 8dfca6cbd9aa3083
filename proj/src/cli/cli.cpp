// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/cli/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "relit/core/error.hpp"
#include "relit/core/runtime.hpp"
#include "relit/core/sha256.hpp"
#include "relit/eval/metrics.hpp"
#include "relit/gen3d/generator.hpp"
#include "relit/io/image_io.hpp"
#include "relit/pipeline/settings.hpp"
#include "relit/pipeline/workspace.hpp"
#include "relit/service/service.hpp"

#ifndef RELIT_VERSION
#define RELIT_VERSION "0.0.0"
#endif
#ifndef RELIT_GIT
#define RELIT_GIT "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace relit::cli {

namespace {

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<long> seed;
    std::string workdir = "work";
    bool resume = false;
    bool quiet = false;
};

pipeline::Settings load_settings(const Common& c, std::string& text) {
    auto config = pipeline::default_config();
    if (!c.config.empty()) config.load_file(c.config);
    for (const auto& o : c.overrides) config.apply_override(o);
    if (c.seed) {
        for (const char* k : {"gen.seed", "invert.seed", "relight.seed"}) config.set(k, std::to_string(*c.seed));
    }
    text = config.to_text();
    return pipeline::settings_from(config);
}

std::string utc_stamp() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%dT%H%M%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
    return os.str();
}

std::string file_sha(const fs::path& p) {
    const auto bytes = io::read_file(p);
    return sha256_hex(std::span<const std::byte>(reinterpret_cast<const std::byte*>(bytes.data()), bytes.size()));
}

/// Run manifest: effective config, version and checksums of the outputs.
void write_manifest(const fs::path& runs, const std::string& command, const std::vector<std::string>& argv,
                    const std::string& config_text, const std::string& config_hash, const std::vector<fs::path>& outputs,
                    int exit_code, double seconds, const json& result) {
    json outs = json::object();
    for (const auto& p : outputs)
        if (fs::is_regular_file(p)) outs[p.string()] = file_sha(p);
    const json m = {{"command", command},      {"argv", argv},
                    {"version", RELIT_VERSION}, {"git", RELIT_GIT},
                    {"config", config_text},    {"config_hash", config_hash},
                    {"outputs", outs},          {"exit_code", exit_code},
                    {"seconds", seconds},       {"result", result}};
    fs::create_directories(runs);
    const auto name = command + "-" + utc_stamp() + "-" + std::to_string(::getpid()) + ".json";
    const auto text = m.dump(2) + "\n";
    io::write_file(runs / name, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0') throw Error(what + ": not a number list: '" + s + "'", ErrorKind::Config);
        out.push_back(v);
    }
    if (out.empty()) throw Error(what + " is empty", ErrorKind::Config);
    return out;
}

Image side_by_side(const Image& a, const Image& b) {
    Image out(a.width + b.width, std::max(a.height, b.height));
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = a.at(x, y, c);
    for (int y = 0; y < b.height; ++y)
        for (int x = 0; x < b.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(a.width + x, y, c) = b.at(x, y, c);
    return out;
}

std::atomic<service::HttpServer*> g_server{nullptr};

void on_signal(int) {
    if (auto* s = g_server.load()) s->stop();
}

struct RelightArgs {
    std::optional<int> subject;
    std::optional<int> camera;
    std::string source_env;
    std::string image;
    std::string env;
    std::string envmap;
    std::string yaws;
    std::string pitches;
    std::string out = "frames";
};

std::string env_list(const std::vector<std::string>& names) {
    std::string s;
    for (const auto& n : names) s += (s.empty() ? "" : ", ") + n;
    return s;
}

json cmd_relight(pipeline::Workspace& ws, const RelightArgs& a, std::ostream& out, std::vector<fs::path>& outputs) {
    const auto data = ws.dataset();
    const auto& names = data.env_names();
    const auto known = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };

    const bool item = a.image.empty();
    if (!item && (a.subject || a.camera)) throw Error("use either --image or --subject/--camera", ErrorKind::Config);
    if (item && (!a.subject || !a.camera)) throw Error("--subject and --camera name the source item", ErrorKind::Config);
    std::string source_env = a.source_env;
    if (item) {
        if (source_env.empty()) source_env = data.envs(stage::Split::Eval).front();
        if (!known(source_env))
            throw Error("unknown env '" + source_env + "'; available: " + env_list(names), ErrorKind::UnknownResource);
        if (*a.subject < 0 || *a.subject >= data.config().subjects)
            throw Error("unknown subject " + std::to_string(*a.subject), ErrorKind::UnknownResource);
        if (*a.camera < 0 || *a.camera >= static_cast<int>(data.cameras().size()))
            throw Error("unknown camera " + std::to_string(*a.camera), ErrorKind::UnknownResource);
    }
    std::string target = a.env;
    if (a.envmap == "same-as-source") {
        if (!item) throw Error("--envmap same-as-source needs a dataset item", ErrorKind::Config);
        target = source_env;
    } else if (!a.envmap.empty()) {
        throw Error("--envmap accepts only 'same-as-source'", ErrorKind::Config);
    }
    if (target.empty()) throw Error("--env or --envmap is required", ErrorKind::Config);
    if (!known(target))
        throw Error("unknown env '" + target + "'; available: " + env_list(names), ErrorKind::UnknownResource);

    auto models = ws.load();
    torch::NoGradGuard ng;
    const auto& gconf = models.generator->config();
    const int res = gconf.output_res;
    Image source;
    stage::CameraPose source_pose;
    if (item) {
        source = data.relit(*a.subject, source_env, *a.camera);
        source_pose = data.cameras()[static_cast<std::size_t>(*a.camera)];
    } else {
        source = io::read_png(a.image);
        if (source.width != res || source.height != res)
            throw Error("input image must be " + std::to_string(res) + "x" + std::to_string(res) + " pixels",
                        ErrorKind::Config);
        source_pose = gconf.arc.pose(0.0, 0.0, res, res);
    }
    const std::vector<stage::CameraPose> sp = {source_pose};
    const auto inv = models.inverter->invert(gen3d::from_image(source), sp);
    const auto cond = relight::condition_batch(std::vector<illum::LightWeights>{data.weights(target)});
    const auto relit = models.model->relight_latent(inv, cond);

    std::vector<double> yaws = a.yaws.empty() ? std::vector<double>{source_pose.yaw_deg()} : parse_list(a.yaws, "--yaw");
    std::vector<double> pitches =
        a.pitches.empty() ? std::vector<double>{source_pose.pitch_deg()} : parse_list(a.pitches, "--pitch");
    if (pitches.size() == 1) pitches.resize(yaws.size(), pitches.front());
    if (pitches.size() != yaws.size()) throw Error("--pitch needs one value or one per yaw", ErrorKind::Config);

    fs::create_directories(a.out);
    json frames = json::array();
    for (std::size_t i = 0; i < yaws.size(); ++i) {
        const auto pose = gconf.arc.pose(yaws[i], pitches[i], res, res);
        const std::vector<stage::CameraPose> p = {pose};
        const auto img = gen3d::to_image(models.model->render(relit, p).image);
        std::ostringstream stem;
        stem << "frame_" << std::setw(3) << std::setfill('0') << i;
        const auto png = fs::path(a.out) / (stem.str() + ".png");
        io::write_png(png, img);
        const json side = {{"yaw", yaws[i]},
                           {"pitch", pitches[i]},
                           {"env", target},
                           {"extrapolated_pose", models.generator->extrapolated(pose)}};
        const auto sidecar = fs::path(a.out) / (stem.str() + ".json");
        const auto text = side.dump(2) + "\n";
        io::write_file(sidecar, std::vector<std::uint8_t>(text.begin(), text.end()));
        outputs.push_back(png);
        outputs.push_back(sidecar);
        frames.push_back(side);
    }
    json result = {{"frames", frames}, {"env", target}};
    if (item) {
        const auto img = gen3d::to_image(models.model->render(relit, sp).image);
        const auto truth = data.relit(*a.subject, target, *a.camera);
        const auto& subject = data.subject(*a.subject);
        const json m = {{"camera", *a.camera},
                        {"psnr", eval::psnr(img, truth)},
                        {"ssim", eval::ssim(img, truth)},
                        {"ld", eval::image_landmark_distance(img, truth, subject, source_pose)},
                        {"psnr_vs_source", eval::psnr(img, source)},
                        {"copy_input_psnr", eval::psnr(source, truth)}};
        const auto cmp = fs::path(a.out) / "comparison.png";
        io::write_png(cmp, side_by_side(img, truth));
        outputs.push_back(cmp);
        result["metrics"] = m;
        out << std::fixed << std::setprecision(3) << "metrics camera=" << *a.camera << " psnr=" << m["psnr"].get<double>()
            << " ssim=" << m["ssim"].get<double>() << " ld=" << m["ld"].get<double>()
            << " psnr_vs_source=" << m["psnr_vs_source"].get<double>()
            << " copy_input_psnr=" << m["copy_input_psnr"].get<double>() << "\n";
    }
    out << "wrote " << yaws.size() << " frames to " << a.out << "\n";
    return result;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    init_runtime();
    CLI::App app{"relit: 3D-aware portrait relighting on a virtual lightstage", "relit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(RELIT_VERSION) + " (" + RELIT_GIT + ")");
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", common.config, "configuration file");
        sub->add_option("--set", common.overrides, "override, key=value (repeatable)");
        sub->add_option("--seed", common.seed, "seed for every training stage");
        sub->add_option("-w,--workdir", common.workdir, "working directory")->capture_default_str();
        sub->add_flag("--quiet", common.quiet, "no per-step progress");
    };
    auto* gen_data = app.add_subcommand("gen-data", "render the virtual lightstage dataset");
    add_common(gen_data);
    gen_data->add_flag("--resume", common.resume, "continue a partial build");

    auto* train = app.add_subcommand("train", "train one pipeline stage");
    add_common(train);
    std::string stage_name;
    train->add_option("stage", stage_name, "generator | inversion | relight")
        ->required()
        ->check(CLI::IsMember({"generator", "inversion", "relight"}));
    train->add_flag("--resume", common.resume, "skip an up-to-date stage, continue an interrupted one");

    auto* all = app.add_subcommand("pipeline", "gen-data, every training stage and eval");
    add_common(all);
    all->add_flag("--resume", common.resume, "skip up-to-date stages");

    RelightArgs ra;
    auto* relight = app.add_subcommand("relight", "relight one image and render it from several poses");
    add_common(relight);
    relight->add_option("--subject", ra.subject, "dataset subject of the source item");
    relight->add_option("--camera", ra.camera, "dataset camera of the source item");
    relight->add_option("--source-env", ra.source_env, "env of the source item (default: first held-out env)");
    relight->add_option("--image", ra.image, "source PNG at model resolution, frontal pose");
    relight->add_option("--env", ra.env, "target env name");
    relight->add_option("--envmap", ra.envmap, "'same-as-source' relights to the source env");
    relight->add_option("--yaw", ra.yaws, "comma-separated yaws, degrees (default: source camera)");
    relight->add_option("--pitch", ra.pitches, "one pitch or one per yaw, degrees");
    relight->add_option("-o,--out", ra.out, "output directory")->capture_default_str();

    auto* evalc = app.add_subcommand("eval", "evaluate on the held-out split");
    add_common(evalc);
    auto* ablate = app.add_subcommand("ablate", "train and evaluate the ablation variants");
    add_common(ablate);
    ablate->add_flag("--resume", common.resume, "reuse up-to-date variant checkpoints");
    auto* bench = app.add_subcommand("bench", "time inversion, relighting and cached-latent rendering");
    add_common(bench);
    auto* serve = app.add_subcommand("serve", "run the HTTP session service");
    add_common(serve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (e.get_name() == "CallForVersion" ? e.what() + std::string("\n") : app.help());
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::Config);
    }

    const auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name() == "train" ? "train-" + stage_name : sub->get_name();
    const std::vector<std::string> args(argv, argv + argc);
    const auto t0 = std::chrono::steady_clock::now();
    std::string config_text, config_hash;
    std::optional<pipeline::Workspace> ws;
    std::vector<fs::path> outputs;
    json result = json::object();
    int code = 0;
    auto logger = [&](const json& j) {
        if (common.quiet) return;
        if (j.contains("step") && j["step"].is_number_integer() && !j.contains("validation") &&
            j["step"].get<int>() % 100 != 0)
            return;
        out << j.dump() << "\n" << std::flush;
    };
    try {
        auto settings = load_settings(common, config_text);
        config_hash = settings.hash;
        ws.emplace(common.workdir, settings);
        auto& w = *ws;
        const auto ck = [&](const std::string& c) { return w.checkpoint(c); };

        if (command == "gen-data" || command == "pipeline") {
            const auto r = w.gen_data(common.resume || command == "pipeline", [&](const std::string& s) {
                if (!common.quiet) out << s << "\n";
            });
            result["gen_data"] = {{"olat_images", r.olat_images},
                                  {"relit_images", r.relit_images},
                                  {"bytes", r.bytes},
                                  {"up_to_date", r.up_to_date}};
            outputs.push_back(w.data_dir() / "meta.json");
            out << "dataset: " << r.olat_images << " OLAT, " << r.relit_images << " relit images, " << r.bytes
                << " bytes" << (r.up_to_date ? " (up to date)" : "") << "\n";
        }
        if (command == "train-generator" || command == "pipeline") {
            result["generator"] = w.train_generator(common.resume || command == "pipeline", logger);
            outputs.push_back(ck("generator"));
        }
        if (command == "train-inversion" || command == "pipeline") {
            result["inversion"] = w.train_inversion(common.resume || command == "pipeline", logger);
            outputs.push_back(ck("encoder"));
            outputs.push_back(ck("afa"));
        }
        if (command == "train-relight" || command == "pipeline") {
            result["relight"] = w.train_relighter(common.resume || command == "pipeline", logger);
            outputs.push_back(ck("relighter"));
        }
        if (command == "eval" || command == "pipeline") {
            auto models = w.load();
            const auto report = w.evaluate(models, "eval");
            fs::create_directories(w.reports_dir());
            for (const auto& p : report.write(w.reports_dir())) outputs.push_back(p);
            out << report.summary_text();
            result["eval"] = json::object();
            for (const auto& [m, a] : report.summary) result["eval"][m] = a.to_json();
        }
        if (command == "relight") result = cmd_relight(w, ra, out, outputs);
        if (command == "ablate") {
            const auto report = w.ablate(common.resume, logger);
            fs::create_directories(w.reports_dir());
            for (const auto& p : report.write(w.reports_dir())) outputs.push_back(p);
            out << report.summary_text();
            for (const auto& r : report.rows) result[r.variant.name] = r.to_json();
        }
        if (command == "bench") {
            auto models = w.load();
            const auto r = w.bench(models);
            fs::create_directories(w.reports_dir());
            const auto path = w.reports_dir() / ("bench-" + config_hash + ".json");
            const auto text = r.to_json().dump(2) + "\n";
            io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
            outputs.push_back(path);
            out << r.summary_text();
            result = r.to_json();
        }
        if (command == "serve") {
            service::ServerConfig defaults;
            defaults.workspace = common.workdir;
            const auto sc = service::server_config_from_env(defaults);
            pipeline::Workspace sws(sc.workspace, settings);
            service::ServiceOptions so;
            so.ttl = sc.ttl;
            service::RelightService svc(so);
            service::HttpServer server(svc);
            const int port = server.bind(sc.host, sc.port);
            const auto data = sws.dataset();
            svc.load(sws.load(), service::load_env_entries(data, sws.envmap_dir()), data);
            out << "listening on http://" << sc.host << ":" << port << "\n" << std::flush;
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.listen();
            g_server = nullptr;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        code = e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        code = 1;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ws) {
        try {
            write_manifest(ws->runs_dir(), command, args, config_text, config_hash, outputs, code, seconds, result);
        } catch (const std::exception& e) {
            err << "warning: run manifest not written: " << e.what() << "\n";
        }
    }
    return code;
}

}  // namespace relit::cli
