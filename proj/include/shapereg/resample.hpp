#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "shapereg/raster.hpp"

namespace shapereg {

enum class KernelKind { NN, BL, CC, KD16 };

struct KernelSpec {
    KernelKind kind = KernelKind::BL;
    double cubic_a = -0.5;   // cubic convolution parameter
    double kaiser_beta = 6.0; // window shape for the 16-point sinc

    int support() const {
        switch (kind) {
            case KernelKind::NN: return 1;
            case KernelKind::BL: return 2;
            case KernelKind::CC: return 4;
            default: return 16;
        }
    }
};

inline KernelSpec kernel_spec(KernelKind kind) { return KernelSpec{kind}; }

inline const char* to_string(KernelKind k) {
    switch (k) {
        case KernelKind::NN: return "NN";
        case KernelKind::BL: return "BL";
        case KernelKind::CC: return "CC";
        default: return "KD16";
    }
}

inline KernelKind kernel_from_string(const std::string& s) {
    if (s == "NN") return KernelKind::NN;
    if (s == "BL") return KernelKind::BL;
    if (s == "CC") return KernelKind::CC;
    if (s == "KD16") return KernelKind::KD16;
    throw std::invalid_argument("unknown kernel name: " + s);
}

namespace detail {

inline double cubic_weight(double t, double a) {
    t = std::abs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
    return 0.0;
}

inline double bessel_i0(double x) {
    // Series expansion; converges fast for the |x| <= beta range used here.
    double sum = 1.0, term = 1.0;
    const double q = 0.25 * x * x;
    for (int k = 1; k < 64; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

inline double kd16_weight(double t, double beta) {
    const double u = t / 8.0; // half-width of the 16-tap window
    if (std::abs(u) > 1.0) return 0.0;
    const double window = bessel_i0(beta * std::sqrt(1.0 - u * u)) / bessel_i0(beta);
    if (t == 0.0) return window;
    const double pt = std::numbers::pi * t;
    return window * std::sin(pt) / pt;
}

// One axis worth of taps: first index + weights normalized to sum 1.
struct Taps {
    int first;
    std::array<double, 16> w;
    int count;
};

inline Taps axis_taps(double coord, const KernelSpec& k) {
    Taps taps{};
    switch (k.kind) {
        case KernelKind::NN: {
            taps.first = static_cast<int>(std::floor(coord + 0.5)); // half-up ties
            taps.w[0] = 1.0;
            taps.count = 1;
            return taps;
        }
        case KernelKind::BL: {
            const int x0 = static_cast<int>(std::floor(coord));
            const double f = coord - x0;
            taps.first = x0;
            taps.w[0] = 1.0 - f;
            taps.w[1] = f;
            taps.count = 2;
            return taps;
        }
        case KernelKind::CC: {
            const int x0 = static_cast<int>(std::floor(coord));
            taps.first = x0 - 1;
            for (int j = 0; j < 4; ++j)
                taps.w[j] = cubic_weight(coord - (taps.first + j), k.cubic_a);
            taps.count = 4;
            return taps;
        }
        default: {
            const int x0 = static_cast<int>(std::floor(coord));
            taps.first = x0 - 7;
            double sum = 0.0;
            for (int j = 0; j < 16; ++j) {
                taps.w[j] = kd16_weight(coord - (taps.first + j), k.kaiser_beta);
                sum += taps.w[j];
            }
            // Renormalize so constants are preserved exactly.
            for (int j = 0; j < 16; ++j) taps.w[j] /= sum;
            taps.count = 16;
            return taps;
        }
    }
}

} // namespace detail

// Interpolate img at real coordinates; out-of-bounds samples are folded back
// by reflect-101.
inline double sample(const Raster& img, double x, double y, const KernelSpec& k) {
    if (!std::isfinite(x) || !std::isfinite(y))
        throw std::invalid_argument("sample: non-finite coordinates");
    const detail::Taps tx = detail::axis_taps(x, k);
    const detail::Taps ty = detail::axis_taps(y, k);
    double acc = 0.0;
    for (int jy = 0; jy < ty.count; ++jy) {
        const int yy = reflect101(ty.first + jy, img.height);
        double row = 0.0;
        for (int jx = 0; jx < tx.count; ++jx)
            row += tx.w[jx] * img.at(reflect101(tx.first + jx, img.width), yy);
        acc += ty.w[jy] * row;
    }
    return acc;
}

// Pull-convention warp: out(p) = sample(img, map(p)) for every output pixel.
// `map` takes master-frame pixel coordinates and returns source coordinates.
template <class MapFn>
Raster warp(const Raster& img, MapFn&& map, int out_width, int out_height, const KernelSpec& k) {
    Raster out(out_width, out_height);
    for (int y = 0; y < out_height; ++y)
        for (int x = 0; x < out_width; ++x) {
            const Point q = map(Point{static_cast<double>(x), static_cast<double>(y)});
            out.at(x, y) = sample(img, q.x, q.y, k);
        }
    return out;
}

} // namespace shapereg
