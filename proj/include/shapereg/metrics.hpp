#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapereg/raster.hpp"

namespace shapereg {

struct NcccResult {
    double raw = 0.0;   // Pearson correlation in [-1, 1]
    double paper = 0.0; // clamped-to-[0,1] convention (negatives reported as 0)
};

// Normalized cross-correlation of mean-removed images. Both images must be
// non-constant; a zero-variance input leaves the value undefined.
inline NcccResult nccc(const Raster& a, const Raster& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("nccc: dimension mismatch");
    const double ma = a.mean(), mb = b.mean();
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a.data[i] - ma;
        const double db = b.data[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw std::domain_error("nccc: undefined for constant image (zero variance)");
    NcccResult r;
    r.raw = sab / std::sqrt(saa * sbb);
    r.paper = std::max(0.0, std::min(1.0, r.raw));
    return r;
}

// Root-mean-square Euclidean displacement between aligned point lists.
inline double rmse(const std::vector<Point>& pred, const std::vector<Point>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("rmse: length mismatch");
    if (pred.empty()) throw std::invalid_argument("rmse: need at least one pair");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dx = pred[i].x - truth[i].x;
        const double dy = pred[i].y - truth[i].y;
        acc += dx * dx + dy * dy;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

enum class TimeCategory { Low, Medium, High };

// <30 s low, [30,60] s medium, >60 s high.
inline TimeCategory time_category(double seconds) {
    if (seconds < 0.0) throw std::invalid_argument("time_category: negative duration");
    if (seconds < 30.0) return TimeCategory::Low;
    if (seconds <= 60.0) return TimeCategory::Medium;
    return TimeCategory::High;
}

inline std::string to_string(TimeCategory c) {
    switch (c) {
        case TimeCategory::Low: return "low";
        case TimeCategory::Medium: return "medium";
        default: return "high";
    }
}

} // namespace shapereg
