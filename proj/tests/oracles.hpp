#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "shapereg/raster.hpp"
#include "shapereg/rng.hpp"

namespace oracles {

using shapereg::Point;
using shapereg::Raster;
using shapereg::Rng;

// Exhaustive all-pairs nearest neighbor over 128-d vectors.
template <class Desc>
std::vector<int> brute_force_nearest(const std::vector<Desc>& a, const std::vector<Desc>& b) {
    std::vector<int> nn(a.size(), -1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::max();
        for (std::size_t j = 0; j < b.size(); ++j) {
            double acc = 0.0;
            for (int k = 0; k < 128; ++k) {
                const double d = a[i].v[k] - b[j].v[k];
                acc += d * d;
            }
            if (acc < best) {
                best = acc;
                nn[i] = static_cast<int>(j);
            }
        }
    }
    return nn;
}

// O(h^2) width: minimum over hull-edge directions of the projection extent.
// Hull computed by a plain gift-wrap to stay independent of the library's
// monotone-chain implementation.
inline std::vector<Point> giftwrap_hull(std::vector<Point> pts) {
    if (pts.size() < 3) return pts;
    std::size_t start = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].x < pts[start].x || (pts[i].x == pts[start].x && pts[i].y < pts[start].y))
            start = i;
    std::vector<Point> hull;
    std::size_t p = start;
    do {
        hull.push_back(pts[p]);
        std::size_t q = (p + 1) % pts.size();
        for (std::size_t r = 0; r < pts.size(); ++r) {
            const double cross = (pts[q].x - pts[p].x) * (pts[r].y - pts[p].y) -
                                 (pts[q].y - pts[p].y) * (pts[r].x - pts[p].x);
            const double dq = std::hypot(pts[q].x - pts[p].x, pts[q].y - pts[p].y);
            const double dr = std::hypot(pts[r].x - pts[p].x, pts[r].y - pts[p].y);
            if (cross < -1e-12 || (std::abs(cross) <= 1e-12 && dr > dq)) q = r;
        }
        p = q;
        if (hull.size() > pts.size() + 1) break; // degenerate safety
    } while (p != start);
    return hull;
}

inline double width_by_direction_enumeration(const std::vector<Point>& pts) {
    if (pts.size() < 2) return 0.0;
    std::vector<Point> hull = giftwrap_hull(pts);
    if (hull.size() < 3) {
        // collinear: width is zero
        return 0.0;
    }
    double best = std::numeric_limits<double>::max();
    for (std::size_t e = 0; e < hull.size(); ++e) {
        const Point& a = hull[e];
        const Point& b = hull[(e + 1) % hull.size()];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        if (len < 1e-15) continue;
        // unit normal of the edge
        const double nx = -(b.y - a.y) / len;
        const double ny = (b.x - a.x) / len;
        double lo = std::numeric_limits<double>::max(), hi = -lo;
        for (const Point& p : pts) {
            const double t = p.x * nx + p.y * ny;
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        best = std::min(best, hi - lo);
    }
    return best == std::numeric_limits<double>::max() ? 0.0 : best;
}

inline Raster textured_scene(int n, std::uint64_t seed) {
    // Blob-and-texture scene: several Gaussian blobs over band-limited noise.
    Rng rng(seed);
    Raster img(n, n, 0.0);
    for (int b = 0; b < 12; ++b) {
        const double cx = rng.uniform(0.15, 0.85) * n;
        const double cy = rng.uniform(0.15, 0.85) * n;
        const double s = rng.uniform(2.0, 6.0);
        const double amp = rng.uniform(0.3, 0.9);
        const int r = static_cast<int>(3 * s);
        for (int y = std::max(0, static_cast<int>(cy) - r);
             y <= std::min(n - 1, static_cast<int>(cy) + r); ++y)
            for (int x = std::max(0, static_cast<int>(cx) - r);
                 x <= std::min(n - 1, static_cast<int>(cx) + r); ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                img.at(x, y) += amp * std::exp(-d2 / (2 * s * s));
            }
    }
    // low-frequency texture
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            img.at(x, y) += 0.15 * std::sin(0.17 * x + 1.3) * std::cos(0.13 * y - 0.4) +
                            0.1 * std::sin(0.07 * (x + y));
    double lo = img.min_value(), hi = img.max_value();
    for (double& v : img.data) v = (v - lo) / (hi - lo);
    return img;
}

} // namespace oracles
