#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "shapereg/convolve.hpp"
#include "shapereg/raster.hpp"

namespace shapereg {

struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;      // 1 = edge pixel
    std::vector<double> gradient_mag;    // populated everywhere

    bool edge(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
    double mag(int x, int y) const { return gradient_mag[static_cast<std::size_t>(y) * width + x]; }
};

// Canny edge detector: Gaussian pre-blur, 3x3 Sobel, 4-sector non-maximum
// suppression, 8-connected hysteresis linking. Thresholds apply to the Sobel
// magnitude of [0,1]-normalized intensities.
inline EdgeMap canny(const Raster& img, double sigma, double low, double high) {
    if (!(sigma > 0.0)) throw std::invalid_argument("canny: sigma must be > 0");
    if (!(low > 0.0 && low < high)) throw std::invalid_argument("canny: need 0 < low < high");
    const int support = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
    if (support > img.width || support > img.height)
        throw std::invalid_argument("canny: image smaller than the Gaussian kernel support");

    const Raster smooth = gaussian_blur(img, sigma);
    const Gradients g = sobel(smooth);

    EdgeMap em;
    em.width = img.width;
    em.height = img.height;
    em.gradient_mag.resize(img.size());
    em.mask.assign(img.size(), 0);

    for (std::size_t i = 0; i < img.size(); ++i)
        em.gradient_mag[i] = std::hypot(g.gx.data[i], g.gy.data[i]);

    // Non-maximum suppression: compare against the two neighbors along the
    // gradient direction, quantized to 4 sectors.
    std::vector<std::uint8_t> thin(img.size(), 0);
    auto mag_at = [&](int x, int y) {
        return em.gradient_mag[static_cast<std::size_t>(reflect101(y, img.height)) * img.width +
                               reflect101(x, img.width)];
    };
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double m = em.gradient_mag[static_cast<std::size_t>(y) * img.width + x];
            if (m <= 0.0) continue;
            const double dx = g.gx.at(x, y), dy = g.gy.at(x, y);
            constexpr double pi = 3.14159265358979323846;
            const double angle = std::atan2(dy, dx); // [-pi, pi]
            // Fold into [0, pi) and pick the neighbor pair.
            const double a = angle < 0 ? angle + pi : angle;
            int nx1, ny1, nx2, ny2;
            if (a < pi / 8 || a >= 7 * pi / 8) {
                nx1 = x + 1; ny1 = y; nx2 = x - 1; ny2 = y;            // horizontal gradient
            } else if (a < 3 * pi / 8) {
                nx1 = x + 1; ny1 = y + 1; nx2 = x - 1; ny2 = y - 1;    // diagonal
            } else if (a < 5 * pi / 8) {
                nx1 = x; ny1 = y + 1; nx2 = x; ny2 = y - 1;            // vertical gradient
            } else {
                nx1 = x - 1; ny1 = y + 1; nx2 = x + 1; ny2 = y - 1;    // anti-diagonal
            }
            // Strict on one side so a flat two-pixel ridge keeps exactly one sample.
            if (m > mag_at(nx1, ny1) && m >= mag_at(nx2, ny2))
                thin[static_cast<std::size_t>(y) * img.width + x] = 1;
        }
    }

    // Hysteresis: seed from strong pixels, grow through weak NMS survivors.
    std::vector<std::size_t> stack;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            if (thin[i] && em.gradient_mag[i] >= high && !em.mask[i]) {
                em.mask[i] = 1;
                stack.push_back(i);
                while (!stack.empty()) {
                    const std::size_t j = stack.back();
                    stack.pop_back();
                    const int jx = static_cast<int>(j % img.width);
                    const int jy = static_cast<int>(j / img.width);
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int qx = jx + dx, qy = jy + dy;
                            if (!img.in_bounds(qx, qy)) continue;
                            const std::size_t q = static_cast<std::size_t>(qy) * img.width + qx;
                            if (!em.mask[q] && thin[q] && em.gradient_mag[q] >= low) {
                                em.mask[q] = 1;
                                stack.push_back(q);
                            }
                        }
                }
            }
        }

    // Edges are curves: a strong response whose neighbors all fall below low
    // forms a single-pixel component and is discarded.
    std::vector<std::uint8_t> cleaned = em.mask;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            if (!em.mask[i]) continue;
            bool supported = false;
            for (int dy = -1; dy <= 1 && !supported; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int qx = x + dx, qy = y + dy;
                    if (img.in_bounds(qx, qy) &&
                        em.mask[static_cast<std::size_t>(qy) * img.width + qx]) {
                        supported = true;
                        break;
                    }
                }
            if (!supported) cleaned[i] = 0;
        }
    em.mask = std::move(cleaned);
    return em;
}

// Euclidean-ish distance to the nearest edge pixel (two-pass chamfer 3-4
// approximation, scaled back to pixel units). Used by the per-site feature
// vector for clustering.
inline Raster distance_to_edges(const EdgeMap& em) {
    const int w = em.width, h = em.height;
    const double inf = 1e9;
    Raster d(w, h, inf);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (em.edge(x, y)) d.at(x, y) = 0.0;
    auto relax = [&](int x, int y, int px, int py, double cost) {
        if (px < 0 || px >= w || py < 0 || py >= h) return;
        d.at(x, y) = std::min(d.at(x, y), d.at(px, py) + cost);
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            relax(x, y, x - 1, y, 3.0);
            relax(x, y, x, y - 1, 3.0);
            relax(x, y, x - 1, y - 1, 4.0);
            relax(x, y, x + 1, y - 1, 4.0);
        }
    for (int y = h - 1; y >= 0; --y)
        for (int x = w - 1; x >= 0; --x) {
            relax(x, y, x + 1, y, 3.0);
            relax(x, y, x, y + 1, 3.0);
            relax(x, y, x + 1, y + 1, 4.0);
            relax(x, y, x - 1, y + 1, 4.0);
        }
    for (double& v : d.data) v = v >= inf ? static_cast<double>(w + h) : v / 3.0;
    return d;
}

} // namespace shapereg
