#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapereg/cellular.hpp"
#include "shapereg/ga.hpp"
#include "shapereg/maca.hpp"
#include "shapereg/raster.hpp"
#include "shapereg/rng.hpp"
#include "shapereg/rule_db.hpp"

namespace shapereg {

// Shape-preserving point-set reduction. A (k, eps) line coreset keeps a subset
// Q of the (boundary-ordered) input P, partitioned into at most k chains, such
// that the directional-width measure satisfies
// (1 - eps) * width(P) <= width(Q) <= width(P).

struct PointSet {
    std::vector<Point> points;
    std::string provenance;

    void validate() const {
        if (points.empty()) throw std::invalid_argument("PointSet: need >= 1 point");
        for (const Point& p : points)
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                throw std::invalid_argument("PointSet: non-finite coordinate");
    }
};

struct LineCoreset {
    std::vector<std::vector<Point>> segments; // retained points per chain, in order
    double epsilon = 0.0;
    std::vector<Point> retained; // Q, concatenated over chains (deduplicated)
    std::size_t source_size = 0; // |P|
};

namespace hull_detail {

inline double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

} // namespace hull_detail

// Andrew monotone chain; returns hull vertices in counter-clockwise order
// (collinear points removed). Degenerate inputs collapse to 1 or 2 points.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point& a, const Point& b) {
                              return a.x == b.x && a.y == b.y;
                          }),
              pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<Point> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && hull_detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && hull_detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Minimum directional extent, via rotating calipers over hull edges: the width
// is always attained with one side flush against a hull edge.
inline double width(const PointSet& ps) {
    ps.validate();
    const std::vector<Point> hull = convex_hull(ps.points);
    if (hull.size() <= 2) return 0.0;
    const std::size_t h = hull.size();
    double best = std::numeric_limits<double>::max();
    std::size_t j = 1;
    for (std::size_t i = 0; i < h; ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % h];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        if (len < 1e-15) continue;
        auto dist = [&](std::size_t idx) {
            return std::abs(hull_detail::cross(a, b, hull[idx])) / len;
        };
        // Advance the antipodal pointer while the distance keeps growing.
        while (dist((j + 1) % h) > dist(j)) j = (j + 1) % h;
        best = std::min(best, dist(j));
    }
    return best == std::numeric_limits<double>::max() ? 0.0 : best;
}

// Maximum pairwise distance (the pluggable alternative measure).
inline double diameter(const PointSet& ps) {
    ps.validate();
    const std::vector<Point> hull = convex_hull(ps.points);
    double best = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i)
        for (std::size_t j = i + 1; j < hull.size(); ++j)
            best = std::max(best, distance(hull[i], hull[j]));
    return best;
}

namespace coreset_detail {

inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    if (len2 < 1e-30) return distance(p, a);
    double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

struct Chain {
    std::size_t begin; // index range [begin, end] into the ordered point list
    std::size_t end;
};

// Farthest-point split: recursively cut the chain at its maximum-deviation
// point until k chains exist (or chains run out of interior points).
inline std::vector<Chain> partition_chains(const std::vector<Point>& pts, int k) {
    std::vector<Chain> chains = {{0, pts.size() - 1}};
    while (static_cast<int>(chains.size()) < k) {
        double best_dev = -1.0;
        std::size_t best_chain = 0, best_split = 0;
        for (std::size_t c = 0; c < chains.size(); ++c) {
            const Chain& ch = chains[c];
            if (ch.end - ch.begin < 2) continue;
            for (std::size_t i = ch.begin + 1; i < ch.end; ++i) {
                const double d = point_segment_distance(pts[i], pts[ch.begin], pts[ch.end]);
                if (d > best_dev) {
                    best_dev = d;
                    best_chain = c;
                    best_split = i;
                }
            }
        }
        if (best_dev < 0.0) break; // nothing splittable
        const Chain old = chains[best_chain];
        chains[best_chain] = {old.begin, best_split};
        chains.insert(chains.begin() + static_cast<std::ptrdiff_t>(best_chain) + 1,
                      {best_split, old.end});
    }
    return chains;
}

} // namespace coreset_detail

// Directional-extreme retention over a uniform direction grid. The grid size
// starts at the standard 2*ceil(1/eps) and grows adaptively when the set is
// elongated, which is what makes the (1-eps) width inequality hold for every
// input rather than only for aspect-ratio ~1 sets.
inline LineCoreset build_line_coreset(const PointSet& ps, int k, double epsilon) {
    ps.validate();
    if (k < 1) throw std::invalid_argument("build_line_coreset: infeasible (k < 1)");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("build_line_coreset: epsilon must be in (0,1)");
    if (ps.points.size() < 2)
        throw std::invalid_argument("build_line_coreset: need >= 2 points");

    const std::vector<Point>& pts = ps.points;
    const double w = width(ps);
    const double diam = diameter(ps);

    int dirs = 2 * static_cast<int>(std::ceil(1.0 / epsilon));
    if (w > 1e-12 && diam > 1e-12) {
        const double needed = std::numbers::pi * diam / (2.0 * epsilon * w);
        dirs = std::max(dirs, static_cast<int>(std::ceil(needed)) + 1);
    }

    const auto chains = coreset_detail::partition_chains(pts, k);

    // Projections run on centered coordinates so that near-tie comparisons
    // resolve identically for translated copies of the same shape.
    double cx = 0.0, cy = 0.0;
    for (const Point& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());

    LineCoreset cs;
    cs.epsilon = epsilon;
    cs.source_size = pts.size();
    std::vector<std::uint8_t> keep(pts.size(), 0);
    for (const auto& ch : chains) {
        keep[ch.begin] = keep[ch.end] = 1;
        for (int d = 0; d < dirs; ++d) {
            const double theta = std::numbers::pi * d / dirs;
            const double ux = std::cos(theta), uy = std::sin(theta);
            auto proj = [&](std::size_t i) {
                return (pts[i].x - cx) * ux + (pts[i].y - cy) * uy;
            };
            std::size_t lo = ch.begin, hi = ch.begin;
            double lo_v = proj(ch.begin), hi_v = lo_v;
            for (std::size_t i = ch.begin + 1; i <= ch.end; ++i) {
                const double v = proj(i);
                if (v < lo_v) {
                    lo_v = v;
                    lo = i;
                }
                if (v > hi_v) {
                    hi_v = v;
                    hi = i;
                }
            }
            keep[lo] = keep[hi] = 1;
        }
    }
    for (const auto& ch : chains) {
        std::vector<Point> seg;
        for (std::size_t i = ch.begin; i <= ch.end; ++i)
            if (keep[i]) seg.push_back(pts[i]);
        cs.segments.push_back(std::move(seg));
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (keep[i]) cs.retained.push_back(pts[i]);
    return cs;
}

// Rasterize the retained polyline chains onto a w x h bit grid (Bresenham),
// normalizing the bounding box to the grid.
inline BitPattern rasterize_outline(const LineCoreset& cs, int w, int h) {
    if (w < 1 || h < 1) throw std::invalid_argument("rasterize_outline: empty grid");
    BitPattern grid(static_cast<std::size_t>(w) * h, 0);
    double min_x = std::numeric_limits<double>::max(), min_y = min_x;
    double max_x = -min_x, max_y = -min_x;
    for (const Point& p : cs.retained) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
    const double scale = (std::min(w, h) - 1) / span;
    auto to_grid = [&](const Point& p) {
        return std::pair<int, int>{
            std::clamp(static_cast<int>(std::lround((p.x - min_x) * scale)), 0, w - 1),
            std::clamp(static_cast<int>(std::lround((p.y - min_y) * scale)), 0, h - 1)};
    };
    auto plot_line = [&](std::pair<int, int> a, std::pair<int, int> b) {
        int x0 = a.first, y0 = a.second;
        const int x1 = b.first, y1 = b.second;
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            grid[static_cast<std::size_t>(y0) * w + x0] = 1;
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
    for (const auto& seg : cs.segments)
        for (std::size_t i = 0; i + 1 < seg.size(); ++i)
            plot_line(to_grid(seg[i]), to_grid(seg[i + 1]));
    return grid;
}

// PEF-bit shape score: Hamming distance between the candidate outline's
// attractor bits and the target's.
inline int pef_hamming(const BitPattern& pattern, const std::vector<std::uint8_t>& target_bits,
                       const MACAConfig& cfg) {
    const AttractorResult att = maca_attractor(pattern, cfg);
    const auto bits = extract_pef_bits(att.representative, cfg);
    if (bits.size() != target_bits.size())
        throw std::invalid_argument("pef_hamming: signature length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) d += bits[i] != target_bits[i];
    return d;
}

// Selects (and locally mutates) the candidate whose rasterized outline lands
// in the MACA basin closest to the target's; ties break toward smaller |Q|,
// then candidate index. target_mask dimensions define the rasterization grid
// and must satisfy w*h == cfg.n.
inline LineCoreset ga_select_approximation(const std::vector<LineCoreset>& candidates,
                                           const BinaryMask& target_mask, const MACAConfig& cfg,
                                           const GAParams& ga, std::uint64_t rng_seed) {
    if (candidates.empty())
        throw std::invalid_argument("ga_select_approximation: empty candidate list");
    cfg.validate();
    if (target_mask.width * target_mask.height != cfg.n)
        throw std::invalid_argument("ga_select_approximation: grid size must equal cfg.n");

    const int w = target_mask.width, h = target_mask.height;
    const auto target_bits =
        extract_pef_bits(maca_attractor(target_mask.v, cfg).representative, cfg);

    struct Scored {
        LineCoreset cs;
        int hamming = 0;
        std::size_t q_size = 0;
        int index = 0;
        bool better_than(const Scored& o) const {
            if (hamming != o.hamming) return hamming < o.hamming;
            if (q_size != o.q_size) return q_size < o.q_size;
            return index < o.index;
        }
    };
    auto score = [&](const LineCoreset& cs, int index) {
        Scored s;
        s.cs = cs;
        s.hamming = pef_hamming(rasterize_outline(cs, w, h), target_bits, cfg);
        s.q_size = cs.retained.size();
        s.index = index;
        return s;
    };

    Scored best = score(candidates[0], 0);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        Scored s = score(candidates[i], static_cast<int>(i));
        if (s.better_than(best)) best = s;
    }
    if (candidates.size() == 1 && ga.generations == 0) return best.cs;

    // Local mutation rounds: drop a random non-endpoint retained point and
    // keep the variant when it scores at least as well.
    Rng rng(rng_seed);
    for (int gen = 0; gen < ga.generations; ++gen) {
        if (best.hamming == 0 && gen > 0) break;
        LineCoreset variant = best.cs;
        // pick a chain with interior points
        std::vector<std::size_t> eligible;
        for (std::size_t c = 0; c < variant.segments.size(); ++c)
            if (variant.segments[c].size() > 2) eligible.push_back(c);
        if (eligible.empty()) break;
        const std::size_t c = eligible[static_cast<std::size_t>(rng.index(
            static_cast<int>(eligible.size())))];
        auto& seg = variant.segments[c];
        const std::size_t drop = 1 + static_cast<std::size_t>(rng.index(
                                         static_cast<int>(seg.size()) - 2));
        seg.erase(seg.begin() + static_cast<std::ptrdiff_t>(drop));
        variant.retained.clear();
        for (const auto& s : variant.segments)
            variant.retained.insert(variant.retained.end(), s.begin(), s.end());
        Scored sv = score(variant, best.index);
        if (sv.hamming < best.hamming ||
            (sv.hamming == best.hamming && sv.q_size <= best.q_size))
            best = sv;
    }
    return best.cs;
}

// CSV: `x,y` per line.
inline void save_point_set(const std::string& path, const PointSet& ps) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    for (const Point& p : ps.points) out << p.x << "," << p.y << "\n";
}

inline PointSet load_point_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    PointSet ps;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Point p;
        char comma;
        if (!(ss >> p.x >> comma >> p.y))
            throw std::runtime_error("bad point at " + path + ":" + std::to_string(lineno));
        ps.points.push_back(p);
    }
    ps.validate();
    return ps;
}

// Coreset dump: header `k,epsilon,|P|,|Q|`, then retained points.
inline void save_line_coreset(const std::string& path, const LineCoreset& cs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    out << cs.segments.size() << "," << cs.epsilon << "," << cs.source_size << ","
        << cs.retained.size() << "\n";
    for (const Point& p : cs.retained) out << p.x << "," << p.y << "\n";
}

} // namespace shapereg
