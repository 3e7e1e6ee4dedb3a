#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapereg/components.hpp"
#include "shapereg/coreset.hpp"
#include "shapereg/correspondence.hpp"
#include "shapereg/maca.hpp"
#include "shapereg/raster.hpp"
#include "shapereg/rule_db.hpp"
#include "shapereg/svrf.hpp"

namespace shapereg {

// Transform estimation. Convention throughout: transforms map master-pixel
// coordinates to slave coordinates (pull/backward mapping, what the resampler
// consumes).

struct AffineMap {
    // x' = a x + b y + c ; y' = d x + e y + f
    double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;

    Point apply(const Point& p) const {
        return {a * p.x + b * p.y + c, d * p.x + e * p.y + f};
    }
};

namespace reg_detail {

// Gaussian elimination with partial pivoting on a 3x3 system; returns false
// when the system is rank deficient.
inline bool solve3x3(double m[3][3], double rhs[3], double out[3]) {
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[perm[r]][col]) > std::abs(m[perm[piv]][col])) piv = r;
        std::swap(perm[col], perm[piv]);
        const double p = m[perm[col]][col];
        if (std::abs(p) < 1e-10) return false;
        for (int r = col + 1; r < 3; ++r) {
            const double factor = m[perm[r]][col] / p;
            for (int c = col; c < 3; ++c) m[perm[r]][c] -= factor * m[perm[col]][c];
            rhs[perm[r]] -= factor * rhs[perm[col]];
        }
    }
    for (int col = 2; col >= 0; --col) {
        double acc = rhs[perm[col]];
        for (int c = col + 1; c < 3; ++c) acc -= m[perm[col]][c] * out[c];
        out[col] = acc / m[perm[col]][col];
    }
    return true;
}

// Normal-equations affine fit; false on rank deficiency. Inputs are centered
// first for conditioning.
inline bool affine_lsq(const std::vector<Correspondence>& pairs, AffineMap& out) {
    if (pairs.size() < 3) return false;
    double mx = 0, my = 0;
    for (const auto& c : pairs) {
        mx += c.master.x;
        my += c.master.y;
    }
    mx /= static_cast<double>(pairs.size());
    my /= static_cast<double>(pairs.size());

    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double ru[3] = {0, 0, 0}, rv[3] = {0, 0, 0};
    for (const auto& c : pairs) {
        const double x = c.master.x - mx, y = c.master.y - my;
        const double basis[3] = {x, y, 1.0};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) m[i][j] += basis[i] * basis[j];
            ru[i] += basis[i] * c.slave.x;
            rv[i] += basis[i] * c.slave.y;
        }
    }
    double mu[3][3], mv[3][3];
    std::copy(&m[0][0], &m[0][0] + 9, &mu[0][0]);
    std::copy(&m[0][0], &m[0][0] + 9, &mv[0][0]);
    double su[3], sv[3];
    if (!solve3x3(mu, ru, su) || !solve3x3(mv, rv, sv)) return false;
    out.a = su[0];
    out.b = su[1];
    out.d = sv[0];
    out.e = sv[1];
    // un-center the offsets
    out.c = su[2] - out.a * mx - out.b * my;
    out.f = sv[2] - out.d * mx - out.e * my;
    return true;
}

inline AffineMap translation_fit(const std::vector<Correspondence>& pairs) {
    AffineMap t;
    double dx = 0, dy = 0;
    for (const auto& c : pairs) {
        dx += c.slave.x - c.master.x;
        dy += c.slave.y - c.master.y;
    }
    t.c = dx / static_cast<double>(pairs.size());
    t.f = dy / static_cast<double>(pairs.size());
    return t;
}

} // namespace reg_detail

struct AffineFit {
    AffineMap map;
    std::vector<double> residuals;
    double rms = 0.0;
};

// Global least-squares affine (master -> slave) with per-pair residuals.
inline AffineFit fit_affine_baseline(const CorrespondenceSet& cs) {
    if (cs.pairs.size() < 3)
        throw std::invalid_argument("fit_affine_baseline: need >= 3 pairs");
    AffineFit fit;
    if (!reg_detail::affine_lsq(cs.pairs, fit.map))
        throw std::invalid_argument("fit_affine_baseline: rank deficiency (collinear points)");
    double acc = 0.0;
    for (const auto& c : cs.pairs) {
        const Point p = fit.map.apply(c.master);
        const double r = std::hypot(p.x - c.slave.x, p.y - c.slave.y);
        fit.residuals.push_back(r);
        acc += r * r;
    }
    fit.rms = std::sqrt(acc / static_cast<double>(cs.pairs.size()));
    return fit;
}

struct WMTransform {
    std::vector<Point> controls;   // master-side control positions
    std::vector<AffineMap> locals; // per-control local affine (master -> slave)
    AffineMap global;              // fallback map
    double power = 2.0;
    int neighbor_count = 6;
    int fallback_count = 0; // locals that fell back to the global map
    int pruned_count = 0;   // outlier pairs removed before fitting

    // Inverse-distance-power blend of the local maps; at (numerically) a
    // control point the nearest local map applies directly.
    Point apply(const Point& q) const {
        if (controls.empty()) return global.apply(q);
        double min_d = std::numeric_limits<double>::max();
        std::size_t nearest = 0;
        for (std::size_t i = 0; i < controls.size(); ++i) {
            const double d = distance(q, controls[i]);
            if (d < min_d) {
                min_d = d;
                nearest = i;
            }
        }
        if (min_d < 1e-9) return locals[nearest].apply(q);
        double wsum = 0.0;
        Point out{0.0, 0.0};
        for (std::size_t i = 0; i < controls.size(); ++i) {
            const double w = std::pow(distance(q, controls[i]), -power);
            const Point t = locals[i].apply(q);
            out.x += w * t.x;
            out.y += w * t.y;
            wsum += w;
        }
        out.x /= wsum;
        out.y /= wsum;
        return out;
    }

    // Blend weights at a query point (normalized); exposed for the weight-sum
    // contract and for diagnostics.
    std::vector<double> weights(const Point& q) const {
        std::vector<double> w(controls.size(), 0.0);
        double min_d = std::numeric_limits<double>::max();
        std::size_t nearest = 0;
        for (std::size_t i = 0; i < controls.size(); ++i) {
            const double d = distance(q, controls[i]);
            if (d < min_d) {
                min_d = d;
                nearest = i;
            }
        }
        if (min_d < 1e-9) {
            w[nearest] = 1.0;
            return w;
        }
        double wsum = 0.0;
        for (std::size_t i = 0; i < controls.size(); ++i) {
            w[i] = std::pow(distance(q, controls[i]), -power);
            wsum += w[i];
        }
        for (double& v : w) v /= wsum;
        return w;
    }
};

// Local-affine weighted-mean fit. Outliers are pruned first (residual > 3x
// median under the affine baseline, at most 2 rounds); each control point then
// gets an affine fitted on its r nearest control neighbors, falling back to
// the global fit (or a pure translation when even that is degenerate) on
// rank-deficient neighborhoods.
inline WMTransform fit_weighted_mean(const CorrespondenceSet& cs, int neighbors = 6,
                                     double power = 2.0) {
    if (cs.pairs.size() < 3) throw std::invalid_argument("fit_weighted_mean: need >= 3 pairs");
    if (neighbors < 3) throw std::invalid_argument("fit_weighted_mean: need r >= 3");
    if (!(power > 0)) throw std::invalid_argument("fit_weighted_mean: power must be > 0");

    std::vector<Correspondence> pairs = cs.pairs;

    WMTransform t;
    t.power = power;
    t.neighbor_count = neighbors;

    // Global fit; degrade to a translation-only model on collinear data.
    bool have_global = reg_detail::affine_lsq(pairs, t.global);
    if (!have_global) t.global = reg_detail::translation_fit(pairs);

    // Outlier pruning against the running global fit.
    for (int round = 0; round < 2 && pairs.size() > 3; ++round) {
        std::vector<double> res(pairs.size());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const Point p = t.global.apply(pairs[i].master);
            res[i] = std::hypot(p.x - pairs[i].slave.x, p.y - pairs[i].slave.y);
        }
        std::vector<double> sorted = res;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double med = sorted[sorted.size() / 2];
        if (med < 1e-12) break;
        std::vector<Correspondence> kept;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (res[i] <= 3.0 * med) kept.push_back(pairs[i]);
        if (kept.size() < 3 || kept.size() == pairs.size()) break;
        t.pruned_count += static_cast<int>(pairs.size() - kept.size());
        pairs = std::move(kept);
        AffineMap refit;
        if (reg_detail::affine_lsq(pairs, refit)) t.global = refit;
    }

    const int r = std::min<int>(neighbors, static_cast<int>(pairs.size()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        t.controls.push_back(pairs[i].master);
        // r nearest by master distance (self included), ties by index
        std::vector<std::size_t> order(pairs.size());
        for (std::size_t j = 0; j < pairs.size(); ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return distance(pairs[a].master, pairs[i].master) <
                   distance(pairs[b].master, pairs[i].master);
        });
        std::vector<Correspondence> local;
        local.reserve(static_cast<std::size_t>(r));
        for (int j = 0; j < r; ++j) local.push_back(pairs[order[static_cast<std::size_t>(j)]]);
        AffineMap lm;
        if (reg_detail::affine_lsq(local, lm)) {
            t.locals.push_back(lm);
        } else {
            t.locals.push_back(t.global);
            ++t.fallback_count;
        }
    }
    return t;
}

// Text serialization of the fitted transform (control points, local affine
// coefficients, parameters) for reuse across runs.
inline void save_wm_transform(const std::string& path, const WMTransform& t) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    out << "wm " << t.controls.size() << " " << t.neighbor_count << " " << t.power << "\n";
    out << "global " << t.global.a << " " << t.global.b << " " << t.global.c << " "
        << t.global.d << " " << t.global.e << " " << t.global.f << "\n";
    for (std::size_t i = 0; i < t.controls.size(); ++i) {
        const AffineMap& m = t.locals[i];
        out << t.controls[i].x << " " << t.controls[i].y << " " << m.a << " " << m.b << " "
            << m.c << " " << m.d << " " << m.e << " " << m.f << "\n";
    }
}

inline WMTransform load_wm_transform(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    WMTransform t;
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n >> t.neighbor_count >> t.power) || tag != "wm")
        throw std::runtime_error("bad transform file header: " + path);
    if (!(in >> tag >> t.global.a >> t.global.b >> t.global.c >> t.global.d >> t.global.e >>
          t.global.f) ||
        tag != "global")
        throw std::runtime_error("bad transform file global record: " + path);
    for (std::size_t i = 0; i < n; ++i) {
        Point c;
        AffineMap m;
        if (!(in >> c.x >> c.y >> m.a >> m.b >> m.c >> m.d >> m.e >> m.f))
            throw std::runtime_error("bad transform file control record: " + path);
        t.controls.push_back(c);
        t.locals.push_back(m);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Shape-class maps for correspondence refinement.

struct ClassMap {
    int width = 0;
    int height = 0;
    std::vector<int> class_ids; // -1 = unknown
    std::vector<std::string> legend;

    int at(int x, int y) const {
        if (x < 0 || x >= width || y < 0 || y >= height) return -1;
        return class_ids[static_cast<std::size_t>(y) * width + x];
    }
};

// Canonical shape pattern for a traced object contour: centered, rotated so
// the principal axis is horizontal (with deterministic flips), scaled to the
// grid, drawn as a closed polyline. Same-shape objects under modest rotation
// land on the same bit pattern.
inline BitPattern shape_pattern(const std::vector<Point>& contour, int grid) {
    if (contour.empty()) throw std::invalid_argument("shape_pattern: empty contour");
    const std::size_t n = contour.size();
    double mx = 0, my = 0;
    for (const Point& p : contour) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (const Point& p : contour) {
        sxx += (p.x - mx) * (p.x - mx);
        sxy += (p.x - mx) * (p.y - my);
        syy += (p.y - my) * (p.y - my);
    }
    // The principal axis of a near-symmetric shape is numerically arbitrary;
    // rotate (and flip) only when the moments actually determine them.
    const double spread = sxx + syy;
    const double anisotropy = std::hypot(sxx - syy, 2.0 * sxy);
    const double angle =
        anisotropy > 0.05 * spread ? 0.5 * std::atan2(2.0 * sxy, sxx - syy) : 0.0;
    const double ca = std::cos(-angle), sa = std::sin(-angle);
    std::vector<Point> canon(n);
    double skew_x = 0, skew_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = contour[i].x - mx, y = contour[i].y - my;
        canon[i] = {ca * x - sa * y, sa * x + ca * y};
        skew_x += canon[i].x * canon[i].x * canon[i].x;
        skew_y += canon[i].y * canon[i].y * canon[i].y;
    }
    const double skew_scale =
        1e-3 * std::pow(spread / static_cast<double>(n), 1.5) * static_cast<double>(n);
    const double fx = skew_x < -skew_scale ? -1.0 : 1.0;
    const double fy = skew_y < -skew_scale ? -1.0 : 1.0;
    double max_abs = 1e-9;
    for (Point& p : canon) {
        p.x *= fx;
        p.y *= fy;
        max_abs = std::max({max_abs, std::abs(p.x), std::abs(p.y)});
    }
    const double scale = (grid / 2.0 - 1.0) / max_abs;
    BitPattern bits(static_cast<std::size_t>(grid) * grid, 0);
    auto to_cell = [&](const Point& p) {
        return std::pair<int, int>{
            std::clamp(static_cast<int>(std::lround(p.x * scale + grid / 2.0)), 0, grid - 1),
            std::clamp(static_cast<int>(std::lround(p.y * scale + grid / 2.0)), 0, grid - 1)};
    };
    auto draw = [&](std::pair<int, int> a, std::pair<int, int> b) {
        int x0 = a.first, y0 = a.second;
        const int x1 = b.first, y1 = b.second;
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            bits[static_cast<std::size_t>(y0) * grid + x0] = 1;
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) draw(to_cell(canon[i]), to_cell(canon[(i + 1) % n]));
    return bits;
}

// Classification pattern for an object: the traced boundary is first reduced
// to its line coreset, then canonicalized and rasterized. Both the rule-DB
// builder and the classifier must go through this same path.
inline BitPattern object_class_pattern(const std::vector<Point>& contour, int grid,
                                       int coreset_k = 4, double coreset_eps = 0.1) {
    if (contour.size() < 8) return shape_pattern(contour, grid);
    PointSet ps;
    ps.points = contour;
    const LineCoreset cs = build_line_coreset(ps, coreset_k, coreset_eps);
    return shape_pattern(cs.retained, grid);
}

// Per-pixel shape classes: every connected component of each non-background
// label (label 0 is background) is classified through the rule DB.
inline ClassMap classify_objects(const LabelField& labels, const ShapeRuleDB& db,
                                 int min_area = 8) {
    ClassMap cm;
    cm.width = labels.width;
    cm.height = labels.height;
    cm.class_ids.assign(static_cast<std::size_t>(labels.width) * labels.height, -1);
    if (db.empty()) return cm;
    const MACAConfig& cfg = db.entries.begin()->second.config;
    const int grid = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.n))));
    if (grid * grid != cfg.n)
        throw std::invalid_argument("classify_objects: rule DB grid is not square");

    for (int l = 1; l < labels.num_labels; ++l) {
        BinaryMask mask(labels.width, labels.height);
        for (int y = 0; y < labels.height; ++y)
            for (int x = 0; x < labels.width; ++x) mask.set(x, y, labels.at(x, y) == l);
        const ComponentSet comps = connected_components(mask);
        const auto info = component_info(comps);
        for (const auto& ci : info) {
            if (ci.area < min_area) continue;
            const auto contour = trace_contour(comps, ci.id);
            if (contour.size() < 3) continue;
            const ClassifyResult res =
                maca_classify(object_class_pattern(contour, grid), cfg, db);
            if (res.label == "unknown") continue;
            int class_idx = -1;
            for (std::size_t k = 0; k < cm.legend.size(); ++k)
                if (cm.legend[k] == res.label) class_idx = static_cast<int>(k);
            if (class_idx < 0) {
                class_idx = static_cast<int>(cm.legend.size());
                cm.legend.push_back(res.label);
            }
            for (int y = 0; y < labels.height; ++y)
                for (int x = 0; x < labels.width; ++x)
                    if (comps.id_at(x, y) == ci.id)
                        cm.class_ids[static_cast<std::size_t>(y) * labels.width + x] = class_idx;
        }
    }
    return cm;
}

// Keeps pairs whose endpoints lie in objects of the same class in both
// images; pairs touching unclassified regions survive only above the strict
// score threshold. An empty DB disables refinement (pass-through).
inline CorrespondenceSet refine_correspondences(const CorrespondenceSet& matches,
                                                const LabelField& slave_labels,
                                                const LabelField& master_labels,
                                                const ShapeRuleDB& db,
                                                double unknown_score_threshold = 0.9) {
    if (db.empty()) {
        std::cerr << "refine_correspondences: empty rule DB, refinement disabled\n";
        return matches;
    }
    const ClassMap slave_cm = classify_objects(slave_labels, db);
    const ClassMap master_cm = classify_objects(master_labels, db);

    auto class_name = [](const ClassMap& cm, int id) -> std::string {
        return id < 0 ? std::string("unknown") : cm.legend[static_cast<std::size_t>(id)];
    };

    CorrespondenceSet out;
    out.source = "refined";
    for (const auto& c : matches.pairs) {
        const int cs = slave_cm.at(static_cast<int>(std::lround(c.slave.x)),
                                   static_cast<int>(std::lround(c.slave.y)));
        const int cmm = master_cm.at(static_cast<int>(std::lround(c.master.x)),
                                     static_cast<int>(std::lround(c.master.y)));
        const std::string sn = class_name(slave_cm, cs);
        const std::string mn = class_name(master_cm, cmm);
        if (sn != "unknown" && mn != "unknown") {
            if (sn == mn) out.pairs.push_back(c);
        } else if (c.score > unknown_score_threshold) {
            out.pairs.push_back(c);
        }
    }
    return out;
}

} // namespace shapereg
