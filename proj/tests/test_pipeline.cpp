#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "shapereg/pipeline.hpp"

using namespace shapereg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig base_config(const fs::path& dir) {
    RunConfig cfg;
    cfg.master_path = (dir / "master.png").string();
    cfg.slave_path = (dir / "slave.png").string();
    cfg.gt_path = (dir / "gt.csv").string();
    cfg.output_dir = (dir / "out").string();
    cfg.seed = 1;
    return cfg;
}

} // namespace

TEST_CASE("config parsing rejects unknown keys and bad values", "[pipeline]") {
    CHECK_THROWS_AS(config_from_json({{"bogus_key", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"seed", "not a number"}}), ConfigError);
    nlohmann::json j{{"master", "m.png"}, {"slave", "s.png"}, {"canny_sigma", 2.0}};
    RunConfig cfg = config_from_json(j);
    CHECK(cfg.canny_sigma == 2.0);
    CHECK_THROWS_AS(cfg.validate(), ConfigError); // files do not exist
}

TEST_CASE("config overrides parse numbers and strings", "[pipeline]") {
    nlohmann::json j = nlohmann::json::object();
    apply_override(j, "canny_sigma=1.8");
    apply_override(j, "mu_mode=ga");
    CHECK(j["canny_sigma"].get<double>() == 1.8);
    CHECK(j["mu_mode"].get<std::string>() == "ga");
    CHECK_THROWS_AS(apply_override(j, "no_equals_sign"), ConfigError);
}

TEST_CASE("kernel table overrides parse from config", "[pipeline]") {
    nlohmann::json j{{"kernel_table", {{"1", "KD16"}, {"3", "NN"}}}};
    RunConfig cfg = config_from_json(j);
    REQUIRE(cfg.kernel_table.size() == 2);
    CHECK(cfg.kernel_table[1] == KernelKind::KD16);
    CHECK(cfg.kernel_table[3] == KernelKind::NN);
}

TEST_CASE("end-to-end synthetic registration stays under 1 px", "[pipeline][e2e]") {
    const fs::path dir = fresh_dir("sr_pipe_e2e");
    Raster scene = oracles::textured_scene(256, 601);
    WarpModel warp;
    warp.tx = 6.0;
    warp.ty = -3.0;
    warp.rotation_rad = 4.0 * std::numbers::pi / 180.0;
    warp.scale = 1.0;
    warp.cx = 128;
    warp.cy = 128;
    write_synthetic_pair(scene, warp, 0.01, 5, dir.string());

    RunConfig cfg = base_config(dir);
    EvalReport report = run_pipeline(cfg);

    REQUIRE(report.has_rmse);
    CHECK(report.rmse_px < 1.0);
    CHECK(report.post.paper >= 0.95);
    CHECK(report.improvement);
    CHECK(report.matches_initial >= 10);
    CHECK(report.control_points >= 3);

    // artifacts exist
    for (const char* f : {"registered.png", "overlay.png", "report.json", "timings.json",
                          "summary.txt", "transform.txt", "rules.db",
                          "correspondences_initial.csv", "correspondences_refined.csv",
                          "labels_master.png", "labels_slave.png"})
        CHECK(fs::exists(fs::path(cfg.output_dir) / f));
}

TEST_CASE("identical configs produce byte-identical reports and images", "[pipeline][e2e]") {
    const fs::path dir = fresh_dir("sr_pipe_det");
    Raster scene = oracles::textured_scene(192, 603);
    WarpModel warp;
    warp.tx = -4.0;
    warp.ty = 5.0;
    warp.rotation_rad = -3.0 * std::numbers::pi / 180.0;
    warp.cx = 96;
    warp.cy = 96;
    write_synthetic_pair(scene, warp, 0.01, 11, dir.string());

    RunConfig cfg = base_config(dir);
    cfg.output_dir = (dir / "out_a").string();
    run_pipeline(cfg);
    cfg.output_dir = (dir / "out_b").string();
    run_pipeline(cfg);

    CHECK(slurp((dir / "out_a" / "report.json").string()) ==
          slurp((dir / "out_b" / "report.json").string()));
    CHECK(slurp((dir / "out_a" / "registered.png").string()) ==
          slurp((dir / "out_b" / "registered.png").string()));
    CHECK(slurp((dir / "out_a" / "rules.db").string()) ==
          slurp((dir / "out_b" / "rules.db").string()));
}

TEST_CASE("self-registration of an identity pair is near-perfect", "[pipeline][e2e]") {
    const fs::path dir = fresh_dir("sr_pipe_self");
    Raster scene = oracles::textured_scene(192, 605);
    WarpModel warp;
    warp.cx = 96;
    warp.cy = 96;
    write_synthetic_pair(scene, warp, 0.0, 3, dir.string());

    RunConfig cfg = base_config(dir);
    EvalReport report = run_pipeline(cfg);
    REQUIRE(report.has_pre);
    CHECK(report.post.paper >= 0.999);
    REQUIRE(report.has_rmse);
    CHECK(report.rmse_px < 0.1);
    CHECK(report.improvement);
}

TEST_CASE("report json round-trips the consistency invariant", "[pipeline]") {
    EvalReport r;
    r.post = {0.97, 0.97};
    r.wall_seconds = 42.0;
    CHECK(time_category(r.wall_seconds) == r.category());
    const nlohmann::json t = timings_to_json(r);
    CHECK(t["time_category"] == "medium");
    const nlohmann::json j = report_to_json(r);
    CHECK(!j.contains("wall_seconds")); // deterministic part carries no clock
}
