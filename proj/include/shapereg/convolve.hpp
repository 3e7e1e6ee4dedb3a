#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "shapereg/raster.hpp"

namespace shapereg {

// Discrete Gaussian taps, truncated at radius ceil(3*sigma), normalized to sum 1.
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable 1-D convolution along rows (horizontal = true) or columns, odd-length
// kernel, reflect-101 borders.
inline Raster convolve_1d(const Raster& img, const std::vector<double>& kernel, bool horizontal) {
    const int radius = static_cast<int>(kernel.size()) / 2;
    Raster out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            if (horizontal) {
                for (int t = -radius; t <= radius; ++t)
                    acc += kernel[t + radius] * img.at(reflect101(x + t, img.width), y);
            } else {
                for (int t = -radius; t <= radius; ++t)
                    acc += kernel[t + radius] * img.at(x, reflect101(y + t, img.height));
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

inline Raster convolve_separable(const Raster& img, const std::vector<double>& kernel) {
    return convolve_1d(convolve_1d(img, kernel, true), kernel, false);
}

inline Raster gaussian_blur(const Raster& img, double sigma) {
    return convolve_separable(img, gaussian_kernel(sigma));
}

struct Gradients {
    Raster gx;
    Raster gy;
};

// 3x3 Sobel derivatives, reflect-101 borders.
inline Gradients sobel(const Raster& img) {
    Gradients g{Raster(img.width, img.height), Raster(img.width, img.height)};
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double p00 = img.at_mirror(x - 1, y - 1), p10 = img.at_mirror(x, y - 1),
                         p20 = img.at_mirror(x + 1, y - 1);
            const double p01 = img.at_mirror(x - 1, y), p21 = img.at_mirror(x + 1, y);
            const double p02 = img.at_mirror(x - 1, y + 1), p12 = img.at_mirror(x, y + 1),
                         p22 = img.at_mirror(x + 1, y + 1);
            g.gx.at(x, y) = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
            g.gy.at(x, y) = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
        }
    }
    return g;
}

// max - min over the 3x3 neighborhood, the local contrast measure used by the
// resampling feature classifier.
inline Raster local_contrast_3x3(const Raster& img) {
    Raster out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double lo = img.at(x, y), hi = lo;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const double v = img.at_mirror(x + dx, y + dy);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            out.at(x, y) = hi - lo;
        }
    }
    return out;
}

} // namespace shapereg
