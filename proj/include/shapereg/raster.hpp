#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace shapereg {

// Mirror-without-edge-repeat index fold (reflect-101), the border policy used
// throughout: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
inline int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

// Single-band floating-point image, row-major, intensities nominally in [0,1]
// after load normalization.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Raster() = default;

    Raster(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw std::invalid_argument("Raster: width and height must be >= 1");
    }

    std::size_t size() const { return data.size(); }

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    // Border-safe access with reflect-101 folding.
    double at_mirror(int x, int y) const {
        return at(reflect101(x, width), reflect101(y, height));
    }

    bool same_shape(const Raster& o) const { return width == o.width && height == o.height; }

    double min_value() const { return *std::min_element(data.begin(), data.end()); }
    double max_value() const { return *std::max_element(data.begin(), data.end()); }

    double mean() const {
        double s = 0.0;
        for (double v : data) s += v;
        return s / static_cast<double>(data.size());
    }

    double variance() const {
        const double m = mean();
        double s = 0.0;
        for (double v : data) s += (v - m) * (v - m);
        return s / static_cast<double>(data.size());
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace shapereg
