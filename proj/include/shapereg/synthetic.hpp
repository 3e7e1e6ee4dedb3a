#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "shapereg/raster.hpp"
#include "shapereg/resample.hpp"
#include "shapereg/rng.hpp"

namespace shapereg {

// Synthetic ground truth: a parametric warp (similarity plus a smooth bump
// displacement field) applied to a source image, with exact point
// correspondences on a grid. Stands in for satellite pairs with surveyed
// control points.

struct WarpModel {
    double tx = 0.0;
    double ty = 0.0;
    double rotation_rad = 0.0;
    double scale = 1.0;
    double cx = 0.0; // rotation/scale center
    double cy = 0.0;

    struct Bump {
        double cx, cy;    // bump center
        double ax, ay;    // displacement amplitude, pixels
        double sigma;     // spatial extent
    };
    std::vector<Bump> bumps;

    Point bump_displacement(const Point& p) const {
        double dx = 0.0, dy = 0.0;
        for (const Bump& b : bumps) {
            const double r2 = (p.x - b.cx) * (p.x - b.cx) + (p.y - b.cy) * (p.y - b.cy);
            const double w = std::exp(-r2 / (2.0 * b.sigma * b.sigma));
            dx += b.ax * w;
            dy += b.ay * w;
        }
        return {dx, dy};
    }

    // master -> slave coordinates
    Point apply(const Point& p) const {
        const double ca = std::cos(rotation_rad), sa = std::sin(rotation_rad);
        const double rx = p.x - cx, ry = p.y - cy;
        const Point d = bump_displacement(p);
        return {scale * (ca * rx - sa * ry) + cx + tx + d.x,
                scale * (sa * rx + ca * ry) + cy + ty + d.y};
    }

    // slave -> master; exact for the similarity part, fixed-point for bumps.
    Point inverse(const Point& q) const {
        const double ca = std::cos(rotation_rad), sa = std::sin(rotation_rad);
        auto sim_inv = [&](const Point& s) -> Point {
            const double ux = (s.x - cx - tx) / scale, uy = (s.y - cy - ty) / scale;
            return {ca * ux + sa * uy + cx, -sa * ux + ca * uy + cy};
        };
        Point x = sim_inv(q);
        for (int it = 0; it < 12; ++it) {
            const Point d = bump_displacement(x);
            x = sim_inv({q.x - d.x, q.y - d.y});
        }
        return x;
    }
};

struct SyntheticPair {
    Raster master;
    Raster slave;
    std::vector<Point> gt_master; // grid points in the master frame
    std::vector<Point> gt_slave;  // their exact images under the warp
};

// slave(q) = master(W^-1(q)) + N(0, noise_sigma), clamped to [0,1], with
// ground-truth pairs on an interior grid. Requires >= 70% of the master frame
// to stay visible under the warp.
inline SyntheticPair generate_synthetic_pair(const Raster& img, const WarpModel& warp,
                                             double noise_sigma, std::uint64_t rng_seed,
                                             int grid_step = 32) {
    if (noise_sigma < 0) throw std::invalid_argument("generate_synthetic_pair: negative noise");
    {
        int total = 0, inside = 0;
        for (int y = 0; y < img.height; y += 4)
            for (int x = 0; x < img.width; x += 4) {
                ++total;
                const Point q = warp.apply({static_cast<double>(x), static_cast<double>(y)});
                if (q.x >= 0 && q.x < img.width && q.y >= 0 && q.y < img.height) ++inside;
            }
        if (inside < 0.7 * total)
            throw std::invalid_argument(
                "generate_synthetic_pair: warp keeps less than 70% image overlap");
    }

    SyntheticPair pair;
    pair.master = img;
    pair.slave = Raster(img.width, img.height);
    const bool pure_identity = warp.tx == 0 && warp.ty == 0 && warp.rotation_rad == 0 &&
                               warp.scale == 1 && warp.bumps.empty();
    Rng rng(rng_seed);
    const KernelSpec cc = kernel_spec(KernelKind::CC);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double v;
            if (pure_identity) {
                v = img.at(x, y); // bitwise identity when nothing moves
            } else {
                const Point p = warp.inverse({static_cast<double>(x), static_cast<double>(y)});
                v = sample(img, p.x, p.y, cc);
            }
            if (noise_sigma > 0) v += rng.gaussian(0.0, noise_sigma);
            pair.slave.at(x, y) = std::clamp(v, 0.0, 1.0);
        }

    const int margin = std::max(8, grid_step / 2);
    for (int y = margin; y < img.height - margin; y += grid_step)
        for (int x = margin; x < img.width - margin; x += grid_step) {
            const Point m{static_cast<double>(x), static_cast<double>(y)};
            const Point s = warp.apply(m);
            if (s.x < 0 || s.x >= img.width || s.y < 0 || s.y >= img.height) continue;
            pair.gt_master.push_back(m);
            pair.gt_slave.push_back(s);
        }
    return pair;
}

} // namespace shapereg
