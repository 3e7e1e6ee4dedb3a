#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapereg/adaptive.hpp"
#include "shapereg/canny.hpp"
#include "shapereg/cellular.hpp"
#include "shapereg/components.hpp"
#include "shapereg/coreset.hpp"
#include "shapereg/correspondence.hpp"
#include "shapereg/ga.hpp"
#include "shapereg/gmm.hpp"
#include "shapereg/image_io.hpp"
#include "shapereg/maca.hpp"
#include "shapereg/mdk.hpp"
#include "shapereg/metrics.hpp"
#include "shapereg/pyramid.hpp"
#include "shapereg/raster.hpp"
#include "shapereg/registration.hpp"
#include "shapereg/resample.hpp"
#include "shapereg/rule_db.hpp"
#include "shapereg/sift.hpp"
#include "shapereg/svrf.hpp"
#include "shapereg/synthetic.hpp"

namespace shapereg {

// End-to-end orchestration: edge extraction, CA object abstraction, SVRF
// segmentation, coreset reduction, CA/MACA shape modeling, SIFT matching with
// object refinement, weighted-mean transform fitting, adaptive resampling, and
// evaluation.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string stage_name, const std::string& what)
        : std::runtime_error("stage '" + stage_name + "' failed: " + what),
          stage(std::move(stage_name)) {}
};

struct EvalUndefinedError : std::runtime_error {
    explicit EvalUndefinedError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    std::string master_path;
    std::string slave_path;
    std::string output_dir = "out";
    std::string gt_path; // optional ground-truth correspondence CSV
    std::uint64_t seed = 0;

    double canny_sigma = 1.4;
    double canny_low = 0.08;
    double canny_high = 0.2;

    int ca_max_steps = 30;
    int max_objects = 6;
    int min_object_area = 30;

    int ensemble_size = 5;
    int em_clusters = 0; // 0 = one per segmentation class, capped at 4
    int train_per_class = 80;
    int svm_iterations = 600;
    std::string mu_mode = "fixed"; // "fixed" or "ga"
    double mu = 0.5;
    double beta = 1.0;
    int icm_sweeps = 8;

    int coreset_k = 4;
    double coreset_epsilon = 0.1;

    int shape_grid = 32;
    int pef_count = 24;
    int shape_ga_population = 24;
    int shape_ga_generations = 15;
    int shape_cnn_steps = 15;

    int sift_octaves = 3;
    int sift_scales = 3;
    double sift_sigma0 = 1.6;
    double sift_contrast = 0.02;
    double sift_edge_ratio = 10.0;
    double match_ratio = 0.8;

    int wm_neighbors = 6;
    double wm_power = 2.0;
    double unknown_score_threshold = 0.9;
    int min_refined_matches = 12;

    int pyramid_levels = 3;
    int feature_area_thresh = 4;
    double feature_contrast_thresh = 0.3;
    std::map<int, KernelKind> kernel_table; // per-level overrides

    void validate() const {
        if (master_path.empty() || slave_path.empty())
            throw ConfigError("master and slave image paths are required");
        if (!std::filesystem::exists(master_path))
            throw ConfigError("master image not found: " + master_path);
        if (!std::filesystem::exists(slave_path))
            throw ConfigError("slave image not found: " + slave_path);
        if (!gt_path.empty() && !std::filesystem::exists(gt_path))
            throw ConfigError("ground-truth file not found: " + gt_path);
        if (mu_mode != "fixed" && mu_mode != "ga")
            throw ConfigError("mu_mode must be 'fixed' or 'ga'");
        if (mu < 0 || mu > 1) throw ConfigError("mu must lie in [0,1]");
        if (pyramid_levels < 2) throw ConfigError("pyramid_levels must be >= 2");
        if (shape_grid < 8) throw ConfigError("shape_grid must be >= 8");
    }
};

namespace pipeline_detail {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace pipeline_detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {
        "master", "slave", "output_dir", "gt", "seed", "canny_sigma", "canny_low",
        "canny_high", "ca_max_steps", "max_objects", "min_object_area", "ensemble_size",
        "em_clusters", "train_per_class", "svm_iterations", "mu_mode", "mu", "beta",
        "icm_sweeps", "coreset_k", "coreset_epsilon", "shape_grid", "pef_count",
        "shape_ga_population", "shape_ga_generations", "shape_cnn_steps", "sift_octaves",
        "sift_scales", "sift_sigma0", "sift_contrast", "sift_edge_ratio", "match_ratio",
        "wm_neighbors", "wm_power", "unknown_score_threshold", "min_refined_matches",
        "pyramid_levels", "feature_area_thresh", "feature_contrast_thresh", "kernel_table"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config key: " + it.key());
    }
    RunConfig cfg;
    using pipeline_detail::read_field;
    try {
        read_field(j, "master", cfg.master_path);
        read_field(j, "slave", cfg.slave_path);
        read_field(j, "output_dir", cfg.output_dir);
        read_field(j, "gt", cfg.gt_path);
        read_field(j, "seed", cfg.seed);
        read_field(j, "canny_sigma", cfg.canny_sigma);
        read_field(j, "canny_low", cfg.canny_low);
        read_field(j, "canny_high", cfg.canny_high);
        read_field(j, "ca_max_steps", cfg.ca_max_steps);
        read_field(j, "max_objects", cfg.max_objects);
        read_field(j, "min_object_area", cfg.min_object_area);
        read_field(j, "ensemble_size", cfg.ensemble_size);
        read_field(j, "em_clusters", cfg.em_clusters);
        read_field(j, "train_per_class", cfg.train_per_class);
        read_field(j, "svm_iterations", cfg.svm_iterations);
        read_field(j, "mu_mode", cfg.mu_mode);
        read_field(j, "mu", cfg.mu);
        read_field(j, "beta", cfg.beta);
        read_field(j, "icm_sweeps", cfg.icm_sweeps);
        read_field(j, "coreset_k", cfg.coreset_k);
        read_field(j, "coreset_epsilon", cfg.coreset_epsilon);
        read_field(j, "shape_grid", cfg.shape_grid);
        read_field(j, "pef_count", cfg.pef_count);
        read_field(j, "shape_ga_population", cfg.shape_ga_population);
        read_field(j, "shape_ga_generations", cfg.shape_ga_generations);
        read_field(j, "shape_cnn_steps", cfg.shape_cnn_steps);
        read_field(j, "sift_octaves", cfg.sift_octaves);
        read_field(j, "sift_scales", cfg.sift_scales);
        read_field(j, "sift_sigma0", cfg.sift_sigma0);
        read_field(j, "sift_contrast", cfg.sift_contrast);
        read_field(j, "sift_edge_ratio", cfg.sift_edge_ratio);
        read_field(j, "match_ratio", cfg.match_ratio);
        read_field(j, "wm_neighbors", cfg.wm_neighbors);
        read_field(j, "wm_power", cfg.wm_power);
        read_field(j, "unknown_score_threshold", cfg.unknown_score_threshold);
        read_field(j, "min_refined_matches", cfg.min_refined_matches);
        read_field(j, "pyramid_levels", cfg.pyramid_levels);
        read_field(j, "feature_area_thresh", cfg.feature_area_thresh);
        read_field(j, "feature_contrast_thresh", cfg.feature_contrast_thresh);
        if (j.contains("kernel_table"))
            for (auto it = j.at("kernel_table").begin(); it != j.at("kernel_table").end(); ++it)
                cfg.kernel_table[std::stoi(it.key())] =
                    kernel_from_string(it.value().get<std::string>());
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

// Single key=value override (CLI --set); the value is parsed as JSON when
// possible, else taken as a string.
inline void apply_override(nlohmann::json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    try {
        j[key] = nlohmann::json::parse(value);
    } catch (const std::exception&) {
        j[key] = value;
    }
}

struct StageTiming {
    std::string name;
    double seconds = 0.0;
};

struct EvalReport {
    bool has_pre = false;
    NcccResult pre{};
    NcccResult post{};
    bool has_rmse = false;
    double rmse_px = 0.0;
    int matches_initial = 0;
    int matches_refined = 0;
    int control_points = 0;
    bool refinement_fallback = false;
    int master_objects = 0;
    int slave_objects = 0;
    int master_descriptors = 0;
    int slave_descriptors = 0;
    bool improvement = false;
    std::uint64_t seed = 0;

    double wall_seconds = 0.0;
    std::vector<StageTiming> stage_timings;

    TimeCategory category() const { return time_category(wall_seconds); }
};

// Deterministic fields only; measured times live in timings_to_json so that
// identical runs produce byte-identical reports.
inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["seed"] = r.seed;
    if (r.has_pre) {
        j["nccc_pre"] = {{"raw", r.pre.raw}, {"paper", r.pre.paper}};
    }
    j["nccc_post"] = {{"raw", r.post.raw}, {"paper", r.post.paper}};
    if (r.has_rmse) j["rmse_px"] = r.rmse_px;
    j["matches"] = {{"initial", r.matches_initial},
                    {"refined", r.matches_refined},
                    {"control_points", r.control_points},
                    {"refinement_fallback", r.refinement_fallback}};
    j["objects"] = {{"master", r.master_objects}, {"slave", r.slave_objects}};
    j["descriptors"] = {{"master", r.master_descriptors}, {"slave", r.slave_descriptors}};
    j["improvement"] = r.improvement;
    return j;
}

inline nlohmann::json timings_to_json(const EvalReport& r) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& t : r.stage_timings)
        stages.push_back({{"stage", t.name}, {"seconds", t.seconds}});
    return nlohmann::json{{"wall_seconds", r.wall_seconds},
                          {"time_category", to_string(r.category())},
                          {"stages", stages}};
}

inline std::string report_summary_text(const EvalReport& r) {
    std::ostringstream out;
    out.precision(6);
    out << "registration report\n";
    if (r.has_pre)
        out << "  nccc pre   raw " << r.pre.raw << "  paper " << r.pre.paper << "\n";
    out << "  nccc post  raw " << r.post.raw << "  paper " << r.post.paper << "\n";
    if (r.has_rmse) out << "  rmse       " << r.rmse_px << " px\n";
    out << "  matches    " << r.matches_initial << " -> " << r.matches_refined
        << (r.refinement_fallback ? " (refinement fallback)" : "") << ", control points "
        << r.control_points << "\n";
    out << "  objects    master " << r.master_objects << ", slave " << r.slave_objects << "\n";
    out << "  descriptors master " << r.master_descriptors << ", slave " << r.slave_descriptors
        << "\n";
    out << "  improvement " << (r.improvement ? "yes" : "no") << "\n";
    out << "  wall time  " << r.wall_seconds << " s (" << to_string(r.category()) << ")\n";
    for (const auto& t : r.stage_timings)
        out << "    " << t.name << ": " << t.seconds << " s\n";
    return out.str();
}

namespace pipeline_detail {

struct ImageAnalysis {
    Raster img;
    EdgeMap edges;
    BinaryMask objects;
    ComponentSet object_components;
    LabelField labels;
};

// Abstract object extraction: a threshold-flavored CA whose control input is
// the blurred signed intensity with edge trenches carved in, so adjacent
// objects separate at their boundaries.
inline BinaryMask abstract_objects(const Raster& img, const EdgeMap& edges, int max_steps,
                                   int min_area, int max_objects) {
    Raster u(img.width, img.height);
    const Raster smooth = gaussian_blur(img, 1.0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            u.at(x, y) = 2.0 * smooth.at(x, y) - 1.0 - (edges.edge(x, y) ? 1.2 : 0.0);

    Gene gene;
    gene.feedback[4] = 2.0;
    for (int k = 0; k < 9; ++k)
        if (k != 4) gene.feedback[k] = 0.05;
    gene.control[4] = 2.0;
    gene.bias = -0.5;
    gene.dt = 0.6;

    CAState seed(img.width, img.height, 0.0);
    BinaryMask mask = evolve_to_segmentation(seed, gene, u, max_steps).mask;

    // Keep the largest components above the area floor.
    const ComponentSet comps = connected_components(mask);
    auto info = component_info(comps);
    std::sort(info.begin(), info.end(), [](const ComponentInfo& a, const ComponentInfo& b) {
        if (a.area != b.area) return a.area > b.area;
        return a.id < b.id;
    });
    BinaryMask kept(img.width, img.height);
    int taken = 0;
    std::vector<std::uint8_t> keep_id(static_cast<std::size_t>(comps.count), 0);
    for (const auto& ci : info) {
        if (ci.area < min_area || taken >= max_objects) continue;
        keep_id[static_cast<std::size_t>(ci.id)] = 1;
        ++taken;
    }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int id = comps.id_at(x, y);
            if (id >= 0 && keep_id[static_cast<std::size_t>(id)]) kept.set(x, y, true);
        }
    return kept;
}

// Deterministic stratified pixel sample of a predicate.
template <class Pred>
std::vector<std::size_t> sample_pixels(int width, int height, int want, Pred&& pred) {
    std::vector<std::size_t> all;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (pred(x, y)) all.push_back(static_cast<std::size_t>(y) * width + x);
    if (static_cast<int>(all.size()) <= want) return all;
    std::vector<std::size_t> out;
    const double step = static_cast<double>(all.size()) / want;
    for (int i = 0; i < want; ++i) out.push_back(all[static_cast<std::size_t>(i * step)]);
    return out;
}

inline ImageAnalysis analyze_image(const Raster& img, const RunConfig& cfg,
                                   std::uint64_t stream) {
    ImageAnalysis a;
    a.img = img;
    a.edges = canny(img, cfg.canny_sigma, cfg.canny_low, cfg.canny_high);
    a.objects = abstract_objects(img, a.edges, cfg.ca_max_steps, cfg.min_object_area,
                                 cfg.max_objects);
    a.object_components = connected_components(a.objects);

    const ClusterSeeds seeds = derive_cluster_params(a.objects);
    const int L = seeds.count();
    if (L < 2) {
        // Degenerate scene: no objects found; single background class.
        a.labels.width = img.width;
        a.labels.height = img.height;
        a.labels.num_labels = 1;
        a.labels.labels.assign(img.size(), 0);
        a.labels.unary = UnaryScores(img.width, img.height, 1);
        return a;
    }

    const auto feats = site_features(img, a.edges);

    std::vector<FeatureVec> train_f;
    std::vector<int> train_c, train_l;
    for (int c = 0; c < L; ++c) {
        const auto idx = sample_pixels(img.width, img.height, cfg.train_per_class,
                                       [&](int x, int y) {
                                           const int id = a.object_components.id_at(x, y);
                                           return c == 0 ? id < 0 : id == c - 1;
                                       });
        for (std::size_t i : idx) {
            train_f.push_back(feats[i]);
            train_c.push_back(a.object_components.ids[i]);
            train_l.push_back(c);
        }
    }

    const int M = cfg.em_clusters > 0 ? cfg.em_clusters : std::min(L, 4);
    const Rng base(cfg.seed + 0x5eed);
    MixtureEnsemble ens =
        fit_mixture_ensemble(train_f, M, cfg.ensemble_size,
                             base.fork(stream).next_u64());

    double mu = cfg.mu;
    if (cfg.mu_mode == "ga") {
        // Held-out tile: the training samples themselves, labeled by class.
        const int n = static_cast<int>(train_f.size());
        KernelMatrix Kx(n), Ky(n);
        std::vector<std::vector<double>> resp;
        std::vector<double> self;
        for (const auto& f : train_f) {
            resp.push_back(flat_responsibilities(ens, f));
            double s = 0.0;
            for (double v : resp.back()) s += v * v;
            self.push_back(s);
        }
        for (int i = 0; i < n; ++i) {
            Kx.at(i, i) = 1.0;
            Ky.at(i, i) = 1.0;
            for (int j = i + 1; j < n; ++j) {
                double dot = 0.0;
                for (std::size_t k = 0; k < resp[i].size(); ++k) dot += resp[i][k] * resp[j][k];
                const double kx = dot / std::sqrt(self[i] * self[j]);
                Kx.at(i, j) = Kx.at(j, i) = kx;
                const double ky = train_c[i] == train_c[j] ? 1.0 : 0.0;
                Ky.at(i, j) = Ky.at(j, i) = ky;
            }
        }
        GAParams ga;
        ga.population = 10;
        ga.generations = 8;
        mu = tune_mu_ga(Kx, Ky, train_l, L, ga, base.fork(stream + 10).next_u64()).mu;
    }

    KernelUnaryModel model =
        train_kernel_unary(train_f, train_c, train_l, L, ens, mu, cfg.svm_iterations,
                           base.fork(stream + 20).next_u64());
    const UnaryScores unary =
        unary_from_model(model, feats, a.object_components.ids, img.width, img.height);
    a.labels = svrf_segment(img, unary, cfg.beta, seeds, cfg.icm_sweeps);
    return a;
}

struct ObjectShape {
    int component_id = -1;
    std::vector<Point> contour;
    BitPattern pattern;
};

// Objects for shape modeling: components of non-background segmentation
// labels, boundary-traced and coreset-reduced onto the classification grid.
inline std::vector<ObjectShape> extract_object_shapes(const LabelField& labels,
                                                      const RunConfig& cfg) {
    std::vector<ObjectShape> shapes;
    for (int l = 1; l < labels.num_labels; ++l) {
        BinaryMask mask(labels.width, labels.height);
        for (int y = 0; y < labels.height; ++y)
            for (int x = 0; x < labels.width; ++x) mask.set(x, y, labels.at(x, y) == l);
        const ComponentSet comps = connected_components(mask);
        for (const auto& ci : component_info(comps)) {
            if (ci.area < 8) continue;
            ObjectShape s;
            s.component_id = ci.id;
            s.contour = trace_contour(comps, ci.id);
            if (s.contour.size() < 3) continue;
            s.pattern = object_class_pattern(s.contour, cfg.shape_grid, cfg.coreset_k,
                                             cfg.coreset_epsilon);
            shapes.push_back(std::move(s));
        }
    }
    return shapes;
}

} // namespace pipeline_detail

// Figure-order pipeline over a loaded image pair. Artifacts are written into
// cfg.output_dir as they are produced so failed runs leave their partial
// results behind for debugging.
inline EvalReport run_pipeline(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    using pipeline_detail::ImageAnalysis;
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    const auto out = [&](const std::string& name) {
        return (fs::path(cfg.output_dir) / name).string();
    };

    EvalReport report;
    report.seed = cfg.seed;
    const auto t_start = std::chrono::steady_clock::now();
    auto timed = [&](const std::string& name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                report.stage_timings.push_back(
                    {name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                               .count()});
            } else {
                auto result = fn();
                report.stage_timings.push_back(
                    {name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                               .count()});
                return result;
            }
        } catch (const EvalUndefinedError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(name, e.what());
        }
    };

    const Raster master = timed("load_master", [&] { return load_image(cfg.master_path); });
    const Raster slave = timed("load_slave", [&] { return load_image(cfg.slave_path); });

    ImageAnalysis ma = timed("analyze_master", [&] {
        return pipeline_detail::analyze_image(master, cfg, 1);
    });
    ImageAnalysis sa = timed("analyze_slave", [&] {
        return pipeline_detail::analyze_image(slave, cfg, 2);
    });
    report.master_objects = ma.object_components.count;
    report.slave_objects = sa.object_components.count;

    timed("dump_labels", [&] {
        std::vector<std::array<std::uint8_t, 3>> palette;
        static const std::array<std::uint8_t, 3> colors[8] = {
            {0, 0, 0},       {230, 60, 60},  {60, 180, 75},  {60, 100, 230},
            {240, 200, 60},  {170, 60, 220}, {70, 220, 220}, {250, 140, 40}};
        const int L = std::max(ma.labels.num_labels, sa.labels.num_labels);
        for (int i = 0; i < std::max(L, 1); ++i) palette.push_back(colors[i % 8]);
        save_indexed_png(out("labels_master.png"), ma.labels.width, ma.labels.height,
                         ma.labels.labels, palette);
        save_indexed_png(out("labels_slave.png"), sa.labels.width, sa.labels.height,
                         sa.labels.labels, palette);
        std::ofstream legend(out("labels_legend.txt"));
        legend << "0\tbackground\n";
        for (int i = 1; i < L; ++i) legend << i << "\tobject_class_" << i << "\n";
    });

    // Shape modeling: master objects define the rule DB; slave objects are
    // classified against it during refinement.
    const MACAConfig maca_cfg =
        default_maca_config(cfg.shape_grid * cfg.shape_grid, cfg.pef_count);
    ShapeRuleDB db = timed("shape_modeling", [&] {
        ShapeRuleDB built;
        const auto shapes = pipeline_detail::extract_object_shapes(ma.labels, cfg);
        int idx = 0;
        for (const auto& s : shapes) {
            const auto bits =
                extract_pef_bits(maca_attractor(s.pattern, maca_cfg).representative, maca_cfg);
            bool duplicate = false;
            for (const auto& [label, e] : built.entries)
                if (e.pef_signature == bits) duplicate = true;
            if (duplicate) continue;

            // Inverse-evolve a rule that grows the outline from a point seed.
            CAState seed(cfg.shape_grid, cfg.shape_grid, -1.0);
            seed.at(cfg.shape_grid / 2, cfg.shape_grid / 2) = 1.0;
            Raster input(cfg.shape_grid, cfg.shape_grid);
            BinaryMask target(cfg.shape_grid, cfg.shape_grid);
            for (std::size_t i = 0; i < s.pattern.size(); ++i) {
                input.data[i] = s.pattern[i];
                target.v[i] = s.pattern[i];
            }
            InverseEvolveOptions opts;
            opts.ga.population = cfg.shape_ga_population;
            opts.ga.generations = cfg.shape_ga_generations;
            opts.max_steps = cfg.shape_cnn_steps;
            opts.stop_fitness = 0.98;
            const InverseEvolveResult ga =
                inverse_evolve_ga(seed, target, input, opts, cfg.seed + 7000 + idx);

            RuleEntry e;
            e.label = "obj" + std::to_string(idx);
            e.gene = ga.best;
            e.config = maca_cfg;
            e.pef_signature = bits;
            built.add(e);
            ++idx;
        }
        save_rule_db(out("rules.db"), built);
        return built;
    });

    // SIFT features on both images.
    const auto sift_for = [&](const Raster& img) {
        int octaves = cfg.sift_octaves;
        while (octaves > 1 && (std::min(img.width, img.height) >> (octaves - 1)) < 24) --octaves;
        ScaleSpace ss = build_scale_space(img, octaves, cfg.sift_scales, cfg.sift_sigma0);
        auto kps = detect_and_localize(ss, cfg.sift_contrast, cfg.sift_edge_ratio);
        kps = assign_orientations(ss, kps);
        return compute_descriptors(ss, kps);
    };
    const std::vector<Descriptor> master_desc =
        timed("sift_master", [&] { return sift_for(master); });
    const std::vector<Descriptor> slave_desc =
        timed("sift_slave", [&] { return sift_for(slave); });
    report.master_descriptors = static_cast<int>(master_desc.size());
    report.slave_descriptors = static_cast<int>(slave_desc.size());

    CorrespondenceSet matches = timed("match", [&] {
        return match_descriptors(slave_desc, master_desc, cfg.match_ratio);
    });
    report.matches_initial = static_cast<int>(matches.size());
    save_correspondences(out("correspondences_initial.csv"), matches);

    CorrespondenceSet refined = timed("refine", [&] {
        CorrespondenceSet r = refine_correspondences(matches, sa.labels, ma.labels, db,
                                                     cfg.unknown_score_threshold);
        if (static_cast<int>(r.size()) < std::max(3, cfg.min_refined_matches)) {
            std::cerr << "refine: only " << r.size()
                      << " pairs survive, falling back to unrefined matches\n";
            report.refinement_fallback = true;
            return matches;
        }
        return r;
    });
    report.matches_refined = static_cast<int>(refined.size());
    save_correspondences(out("correspondences_refined.csv"), refined);

    const WMTransform wm = timed("fit_transform", [&] {
        return fit_weighted_mean(refined, cfg.wm_neighbors, cfg.wm_power);
    });
    report.control_points = static_cast<int>(wm.controls.size());
    save_wm_transform(out("transform.txt"), wm);

    const Raster registered = timed("resample", [&] {
        ResamplingRules rules = classify_features_for_resampling(
            slave, sa.labels, sa.edges, cfg.feature_area_thresh, cfg.feature_contrast_thresh);
        for (const auto& [level, kind] : cfg.kernel_table) rules.kernels[level] = kind;
        return adaptive_resample(
            slave, [&](Point p) { return wm.apply(p); }, rules, cfg.pyramid_levels,
            master.width, master.height);
    });
    save_image(out("registered.png"), registered, 16);

    timed("overlay", [&] {
        Raster overlay(master.width, master.height);
        for (int y = 0; y < master.height; ++y)
            for (int x = 0; x < master.width; ++x) {
                const bool tile = ((x / 32) + (y / 32)) % 2 == 0;
                overlay.at(x, y) = tile ? master.at(x, y) : registered.at(x, y);
            }
        save_image(out("overlay.png"), overlay);
    });

    timed("evaluate", [&] {
        try {
            if (master.same_shape(slave)) {
                report.pre = nccc(master, slave);
                report.has_pre = true;
            }
            report.post = nccc(master, registered);
        } catch (const std::domain_error& e) {
            throw EvalUndefinedError(e.what());
        }
        report.improvement = !report.has_pre || report.post.paper >= report.pre.paper;
        if (!cfg.gt_path.empty()) {
            const CorrespondenceSet gt = load_correspondences(cfg.gt_path);
            std::vector<Point> pred, truth;
            for (const auto& c : gt.pairs) {
                pred.push_back(wm.apply(c.master));
                truth.push_back(c.slave);
            }
            report.rmse_px = rmse(pred, truth);
            report.has_rmse = true;
        }
    });

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    std::ofstream(out("report.json")) << report_to_json(report).dump(2) << "\n";
    std::ofstream(out("timings.json")) << timings_to_json(report).dump(2) << "\n";
    std::ofstream(out("summary.txt")) << report_summary_text(report);
    return report;
}

// Writes master.png / slave.png / gt.csv (+ warp.json) for a synthetic pair.
inline SyntheticPair write_synthetic_pair(const Raster& img, const WarpModel& warp,
                                          double noise_sigma, std::uint64_t seed,
                                          const std::string& output_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(output_dir);
    SyntheticPair pair = generate_synthetic_pair(img, warp, noise_sigma, seed);
    save_image((fs::path(output_dir) / "master.png").string(), pair.master, 16);
    save_image((fs::path(output_dir) / "slave.png").string(), pair.slave, 16);
    CorrespondenceSet gt;
    for (std::size_t i = 0; i < pair.gt_master.size(); ++i)
        gt.pairs.push_back({pair.gt_slave[i], pair.gt_master[i], 1.0});
    save_correspondences((fs::path(output_dir) / "gt.csv").string(), gt);
    nlohmann::json j{{"tx", warp.tx},
                     {"ty", warp.ty},
                     {"rotation_rad", warp.rotation_rad},
                     {"scale", warp.scale},
                     {"cx", warp.cx},
                     {"cy", warp.cy},
                     {"noise_sigma", noise_sigma},
                     {"seed", seed}};
    std::ofstream((fs::path(output_dir) / "warp.json").string()) << j.dump(2) << "\n";
    return pair;
}

} // namespace shapereg
