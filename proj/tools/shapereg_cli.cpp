// shapereg command line: register image pairs, evaluate results, generate
// synthetic benchmark pairs, run single stages for debugging, and pretty-print
// reports.
//
// Exit codes: 0 success, 2 config error, 3 stage failure, 4 evaluation
// undefined (constant image).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapereg/shapereg.hpp"

namespace fs = std::filesystem;
using namespace shapereg;

namespace {

// The environment may override the output directory, nothing else.
std::string resolve_output_dir(const std::string& from_cli_or_config) {
    if (const char* env = std::getenv("SHAPEREG_OUTPUT_DIR"); env && *env) return env;
    return from_cli_or_config;
}

int run_register(const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& master, const std::string& slave, const std::string& gt,
                 const std::string& output_dir, std::uint64_t seed, bool seed_set) {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot read config file: " + config_path);
        in >> j;
    }
    for (const auto& o : overrides) apply_override(j, o);
    if (!master.empty()) j["master"] = master;
    if (!slave.empty()) j["slave"] = slave;
    if (!gt.empty()) j["gt"] = gt;
    if (!output_dir.empty()) j["output_dir"] = output_dir;
    if (seed_set) j["seed"] = seed;

    RunConfig cfg = config_from_json(j);
    cfg.output_dir = resolve_output_dir(cfg.output_dir);
    EvalReport report = run_pipeline(cfg);
    std::cout << report_summary_text(report);
    return 0;
}

int run_evaluate(const std::string& master_path, const std::string& registered_path,
                 const std::string& gt_path, const std::string& transform_path,
                 const std::string& output_dir) {
    const Raster master = load_image(master_path);
    const Raster registered = load_image(registered_path);
    EvalReport report;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        report.post = nccc(master, registered);
    } catch (const std::domain_error& e) {
        throw EvalUndefinedError(e.what());
    }
    if (!gt_path.empty()) {
        if (transform_path.empty())
            throw ConfigError("--gt requires --transform to map the ground-truth points");
        const WMTransform wm = load_wm_transform(transform_path);
        const CorrespondenceSet gt = load_correspondences(gt_path);
        std::vector<Point> pred, truth;
        for (const auto& c : gt.pairs) {
            pred.push_back(wm.apply(c.master));
            truth.push_back(c.slave);
        }
        report.rmse_px = rmse(pred, truth);
        report.has_rmse = true;
    }
    report.improvement = true;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << report_summary_text(report);
    if (!output_dir.empty()) {
        fs::create_directories(output_dir);
        std::ofstream((fs::path(output_dir) / "report.json").string())
            << report_to_json(report).dump(2) << "\n";
        std::ofstream((fs::path(output_dir) / "timings.json").string())
            << timings_to_json(report).dump(2) << "\n";
    }
    return 0;
}

int run_synth(const std::string& input, const std::string& output_dir, double tx, double ty,
              double rotation_deg, double scale, double noise, std::uint64_t seed,
              int bumps) {
    const Raster img = load_image(input);
    WarpModel warp;
    warp.tx = tx;
    warp.ty = ty;
    warp.rotation_rad = rotation_deg * std::numbers::pi / 180.0;
    warp.scale = scale;
    warp.cx = img.width / 2.0;
    warp.cy = img.height / 2.0;
    Rng rng(seed ^ 0xb0b5);
    for (int i = 0; i < bumps; ++i)
        warp.bumps.push_back({rng.uniform(0.2, 0.8) * img.width,
                              rng.uniform(0.2, 0.8) * img.height, rng.uniform(-1.5, 1.5),
                              rng.uniform(-1.5, 1.5), rng.uniform(15.0, 40.0)});
    write_synthetic_pair(img, warp, noise, seed, resolve_output_dir(output_dir));
    std::cout << "synthetic pair written to " << resolve_output_dir(output_dir) << "\n";
    return 0;
}

int run_stage(const std::string& name, const std::string& input, const std::string& second,
              const std::string& output_dir, double sigma, double low, double high,
              int levels) {
    const std::string dir = resolve_output_dir(output_dir.empty() ? "stage_out" : output_dir);
    fs::create_directories(dir);
    const auto out = [&](const std::string& f) { return (fs::path(dir) / f).string(); };

    if (name == "canny") {
        const Raster img = load_image(input);
        EdgeMap em = canny(img, sigma, low, high);
        Raster mask(img.width, img.height);
        for (std::size_t i = 0; i < mask.size(); ++i) mask.data[i] = em.mask[i] ? 1.0 : 0.0;
        save_image(out("edges.png"), mask);
        double peak = 0.0;
        for (double v : em.gradient_mag) peak = std::max(peak, v);
        Raster mag(img.width, img.height);
        for (std::size_t i = 0; i < mag.size(); ++i)
            mag.data[i] = peak > 0 ? em.gradient_mag[i] / peak : 0.0;
        save_image(out("gradient.png"), mag);
    } else if (name == "pyramid") {
        const Raster img = load_image(input);
        dump_pyramid(laplacian_build(img, levels), (fs::path(dir) / "pyr").string());
    } else if (name == "sift") {
        const Raster img = load_image(input);
        ScaleSpace ss = build_scale_space(img, 3, 3, 1.6);
        auto kps = assign_orientations(ss, detect_and_localize(ss, 0.02, 10.0));
        save_descriptors(out("descriptors.txt"), compute_descriptors(ss, kps));
    } else if (name == "match") {
        if (second.empty()) throw ConfigError("stage match needs --second descriptors file");
        auto a = load_descriptors(input);
        auto b = load_descriptors(second);
        save_correspondences(out("matches.csv"), match_descriptors(a, b, 0.8));
    } else if (name == "coreset") {
        PointSet ps = load_point_set(input);
        save_line_coreset(out("coreset.csv"), build_line_coreset(ps, 4, 0.1));
    } else {
        throw ConfigError("unknown stage: " + name +
                          " (expected canny|pyramid|sift|match|coreset)");
    }
    std::cout << "stage " << name << " artifacts in " << dir << "\n";
    return 0;
}

int run_report(const std::string& report_path, const std::string& timings_path) {
    std::ifstream in(report_path);
    if (!in) throw ConfigError("cannot read report: " + report_path);
    nlohmann::json j;
    in >> j;
    EvalReport r;
    r.seed = j.value("seed", 0ull);
    if (j.contains("nccc_pre")) {
        r.has_pre = true;
        r.pre.raw = j["nccc_pre"]["raw"].get<double>();
        r.pre.paper = j["nccc_pre"]["paper"].get<double>();
    }
    r.post.raw = j["nccc_post"]["raw"].get<double>();
    r.post.paper = j["nccc_post"]["paper"].get<double>();
    if (j.contains("rmse_px")) {
        r.has_rmse = true;
        r.rmse_px = j["rmse_px"].get<double>();
    }
    r.matches_initial = j["matches"]["initial"].get<int>();
    r.matches_refined = j["matches"]["refined"].get<int>();
    r.control_points = j["matches"]["control_points"].get<int>();
    r.refinement_fallback = j["matches"]["refinement_fallback"].get<bool>();
    r.master_objects = j["objects"]["master"].get<int>();
    r.slave_objects = j["objects"]["slave"].get<int>();
    r.master_descriptors = j["descriptors"]["master"].get<int>();
    r.slave_descriptors = j["descriptors"]["slave"].get<int>();
    r.improvement = j["improvement"].get<bool>();
    if (!timings_path.empty()) {
        std::ifstream tin(timings_path);
        if (tin) {
            nlohmann::json tj;
            tin >> tj;
            r.wall_seconds = tj.value("wall_seconds", 0.0);
            if (tj.contains("stages"))
                for (const auto& s : tj["stages"])
                    r.stage_timings.push_back(
                        {s["stage"].get<std::string>(), s["seconds"].get<double>()});
        }
    }
    std::cout << report_summary_text(r);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shapereg: feature-based image registration with cellular-automata shape "
                 "modeling and adaptive resampling"};
    app.require_subcommand(1);

    // register
    auto* reg = app.add_subcommand("register", "run the full registration pipeline");
    std::string cfg_path, master, slave, gt, outdir;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    reg->add_option("--config", cfg_path, "JSON config file");
    reg->add_option("--master", master, "master (reference) image");
    reg->add_option("--slave", slave, "slave image to align");
    reg->add_option("--gt", gt, "ground-truth correspondence CSV for RMSE");
    reg->add_option("--out", outdir, "output directory");
    auto* seed_opt = reg->add_option("--seed", seed, "RNG seed (default 0)");
    reg->add_option("--set", overrides, "config override key=value (repeatable)");

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "evaluate a registered image against the master");
    std::string ev_master, ev_registered, ev_gt, ev_transform, ev_out;
    eva->add_option("--master", ev_master, "master image")->required();
    eva->add_option("--registered", ev_registered, "registered image")->required();
    eva->add_option("--gt", ev_gt, "ground-truth correspondence CSV");
    eva->add_option("--transform", ev_transform, "fitted transform file (for --gt)");
    eva->add_option("--out", ev_out, "directory for report.json/timings.json");

    // synth
    auto* syn = app.add_subcommand("synth", "generate a synthetic pair with known warp");
    std::string sy_input, sy_out = "synth_out";
    double sy_tx = 0, sy_ty = 0, sy_rot = 0, sy_scale = 1, sy_noise = 0;
    std::uint64_t sy_seed = 0;
    int sy_bumps = 0;
    syn->add_option("--input", sy_input, "source image")->required();
    syn->add_option("--out", sy_out, "output directory");
    syn->add_option("--tx", sy_tx, "translation x, px");
    syn->add_option("--ty", sy_ty, "translation y, px");
    syn->add_option("--rotation", sy_rot, "rotation, degrees");
    syn->add_option("--scale", sy_scale, "uniform scale factor");
    syn->add_option("--noise", sy_noise, "gaussian noise sigma");
    syn->add_option("--seed", sy_seed, "RNG seed");
    syn->add_option("--bumps", sy_bumps, "number of local displacement bumps");

    // stage
    auto* stg = app.add_subcommand("stage", "run a single stage for debugging");
    std::string st_name, st_input, st_second, st_out;
    double st_sigma = 1.4, st_low = 0.08, st_high = 0.2;
    int st_levels = 3;
    stg->add_option("name", st_name, "canny|pyramid|sift|match|coreset")->required();
    stg->add_option("--input", st_input, "input file")->required();
    stg->add_option("--second", st_second, "second input (match stage)");
    stg->add_option("--out", st_out, "output directory");
    stg->add_option("--sigma", st_sigma, "canny blur sigma");
    stg->add_option("--low", st_low, "canny low threshold");
    stg->add_option("--high", st_high, "canny high threshold");
    stg->add_option("--levels", st_levels, "pyramid band count");

    // report
    auto* rep = app.add_subcommand("report", "print a human-readable report");
    std::string rp_report, rp_timings;
    rep->add_option("--report", rp_report, "report.json path")->required();
    rep->add_option("--timings", rp_timings, "timings.json path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (reg->parsed())
            return run_register(cfg_path, overrides, master, slave, gt, outdir, seed,
                                seed_opt->count() > 0);
        if (eva->parsed()) return run_evaluate(ev_master, ev_registered, ev_gt, ev_transform, ev_out);
        if (syn->parsed())
            return run_synth(sy_input, sy_out, sy_tx, sy_ty, sy_rot, sy_scale, sy_noise,
                             sy_seed, sy_bumps);
        if (stg->parsed())
            return run_stage(st_name, st_input, st_second, st_out, st_sigma, st_low, st_high,
                             st_levels);
        if (rep->parsed()) return run_report(rp_report, rp_timings);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const EvalUndefinedError& e) {
        std::cerr << "evaluation undefined: " << e.what() << "\n";
        return 4;
    } catch (const StageError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
