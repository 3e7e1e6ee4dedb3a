#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "shapereg/image_io.hpp"
#include "shapereg/raster.hpp"

namespace shapereg {

// Burt-Adelson style pyramids. Analysis and synthesis share the 5-tap binomial
// generator [1 4 6 4 1]/16, and band-pass levels store exact residuals, so
// build followed by invert reproduces the source bit-for-bit.

namespace detail {

constexpr double kBinomial5[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

inline Raster binomial_blur(const Raster& img) {
    Raster tmp(img.width, img.height), out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int t = -2; t <= 2; ++t)
                acc += kBinomial5[t + 2] * img.at(reflect101(x + t, img.width), y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int t = -2; t <= 2; ++t)
                acc += kBinomial5[t + 2] * tmp.at(x, reflect101(y + t, img.height));
            out.at(x, y) = acc;
        }
    return out;
}

inline int half_dim(int n) { return (n + 1) / 2; }

} // namespace detail

// Blur then keep even samples; output is ceil(n/2) per axis.
inline Raster pyramid_reduce(const Raster& img) {
    const Raster blurred = detail::binomial_blur(img);
    Raster out(detail::half_dim(img.width), detail::half_dim(img.height));
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = blurred.at(2 * x, 2 * y);
    return out;
}

// Zero-stuffed upsample convolved with the doubled binomial kernel; inverse
// companion of pyramid_reduce for the requested (possibly odd) output size.
inline Raster pyramid_expand(const Raster& img, int out_width, int out_height) {
    if (detail::half_dim(out_width) != img.width || detail::half_dim(out_height) != img.height)
        throw std::invalid_argument("pyramid_expand: output dims inconsistent with input dims");
    Raster tmp(out_width, img.height), out(out_width, out_height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < out_width; ++x) {
            double acc = 0.0;
            for (int t = -2; t <= 2; ++t) {
                const int xi = x + t;
                if ((xi & 1) != 0) continue; // zero-stuffed odd samples
                acc += 2.0 * detail::kBinomial5[t + 2] * img.at(reflect101(xi / 2, img.width), y);
            }
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < out_height; ++y)
        for (int x = 0; x < out_width; ++x) {
            double acc = 0.0;
            for (int t = -2; t <= 2; ++t) {
                const int yi = y + t;
                if ((yi & 1) != 0) continue;
                acc += 2.0 * detail::kBinomial5[t + 2] * tmp.at(x, reflect101(yi / 2, img.height));
            }
            out.at(x, y) = acc;
        }
    return out;
}

// Level 0 is the input; each following level is blur-then-decimate of the
// previous one.
inline std::vector<Raster> gaussian_pyramid(const Raster& img, int levels) {
    if (levels < 1) throw std::invalid_argument("gaussian_pyramid: levels must be >= 1");
    int w = img.width, h = img.height;
    for (int k = 1; k < levels; ++k) {
        if (w < 2 && h < 2)
            throw std::invalid_argument("gaussian_pyramid: too many levels for image size");
        w = detail::half_dim(w);
        h = detail::half_dim(h);
    }
    std::vector<Raster> pyr;
    pyr.reserve(static_cast<std::size_t>(levels));
    pyr.push_back(img);
    for (int k = 1; k < levels; ++k) pyr.push_back(pyramid_reduce(pyr.back()));
    return pyr;
}

struct LaplacianPyramid {
    std::vector<Raster> bands; // band-pass levels, finest first
    Raster base;               // coarsest low-pass level

    int level_count() const { return static_cast<int>(bands.size()) + 1; }

    void validate() const {
        int w = 0, h = 0;
        bool first = true;
        for (const Raster& b : bands) {
            if (!first && (b.width != detail::half_dim(w) || b.height != detail::half_dim(h)))
                throw std::invalid_argument("LaplacianPyramid: inconsistent level dimensions");
            w = b.width;
            h = b.height;
            first = false;
        }
        if (!bands.empty() &&
            (base.width != detail::half_dim(w) || base.height != detail::half_dim(h)))
            throw std::invalid_argument("LaplacianPyramid: base dimensions inconsistent");
    }
};

// `bands` band-pass levels plus the low-pass base (bands+1 pyramid levels).
inline LaplacianPyramid laplacian_build(const Raster& img, int bands) {
    if (bands < 1) throw std::invalid_argument("laplacian_build: need >= 1 band");
    {
        int w = img.width, h = img.height;
        for (int k = 0; k < bands; ++k) {
            if (w < 2 && h < 2)
                throw std::invalid_argument("laplacian_build: too many levels for image size");
            w = detail::half_dim(w);
            h = detail::half_dim(h);
        }
    }
    LaplacianPyramid pyr;
    Raster current = img;
    for (int k = 0; k < bands; ++k) {
        Raster next = pyramid_reduce(current);
        Raster up = pyramid_expand(next, current.width, current.height);
        Raster band(current.width, current.height);
        for (std::size_t i = 0; i < band.size(); ++i) band.data[i] = current.data[i] - up.data[i];
        pyr.bands.push_back(std::move(band));
        current = std::move(next);
    }
    pyr.base = std::move(current);
    return pyr;
}

inline Raster laplacian_invert(const LaplacianPyramid& pyr) {
    pyr.validate();
    Raster acc = pyr.base;
    for (int k = static_cast<int>(pyr.bands.size()) - 1; k >= 0; --k) {
        const Raster& band = pyr.bands[k];
        Raster up = pyramid_expand(acc, band.width, band.height);
        for (std::size_t i = 0; i < up.size(); ++i) up.data[i] += band.data[i];
        acc = std::move(up);
    }
    return acc;
}

// Debug dump: one image per level, suffixed _L<k>. Band levels are signed, so
// they are written shifted by +0.5.
inline void dump_pyramid(const LaplacianPyramid& pyr, const std::string& path_prefix,
                         const std::string& extension = ".png") {
    for (std::size_t k = 0; k < pyr.bands.size(); ++k) {
        Raster shifted = pyr.bands[k];
        for (double& v : shifted.data) v += 0.5;
        save_image(path_prefix + "_L" + std::to_string(k) + extension, shifted);
    }
    save_image(path_prefix + "_L" + std::to_string(pyr.bands.size()) + extension, pyr.base);
}

} // namespace shapereg
