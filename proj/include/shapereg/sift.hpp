#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapereg/convolve.hpp"
#include "shapereg/correspondence.hpp"
#include "shapereg/raster.hpp"

namespace shapereg {

// Four-stage keypoint extraction: Gaussian/DoG scale space, sub-pixel extremum
// localization with contrast and curvature-ratio rejection, orientation
// histogram assignment, and the 4x4x8 gradient-histogram descriptor, with
// Lowe-ratio matching on the resulting 128-d vectors.

struct Keypoint {
    double x = 0.0;          // sub-pixel image coordinates (base-image frame)
    double y = 0.0;
    double scale = 0.0;      // absolute sigma in base-image pixels
    double orientation = 0.0; // radians in [0, 2pi)
    double response = 0.0;   // DoG contrast magnitude
    int octave = 0;          // detection metadata, used for gradient sampling
    int layer = 0;
};

struct Descriptor {
    std::array<double, 128> v{};
    Keypoint owner;
};

struct ScaleSpace {
    struct Octave {
        std::vector<Raster> gauss; // scales_per_octave + 3 images
        std::vector<Raster> dog;   // scales_per_octave + 2 images
    };
    int scales_per_octave = 3;
    double sigma0 = 1.6;
    std::vector<Octave> octaves;

    // Blur of layer l within an octave, in that octave's pixel units.
    double layer_sigma(double layer) const {
        return sigma0 * std::pow(2.0, layer / scales_per_octave);
    }
};

namespace sift_detail {

constexpr double kInputBlur = 0.5;  // assumed blur of the source image
constexpr int kBorder = 5;          // detection margin, pixels
constexpr int kMaxInterpSteps = 5;
constexpr int kOrientationBins = 36;
constexpr double kOrientationSigmaFactor = 1.5;
constexpr double kOrientationRadiusFactor = 4.5; // 3 * sigma factor
constexpr double kOrientationPeakRatio = 0.8;
constexpr int kDescrWidth = 4;
constexpr int kDescrBins = 8;
constexpr double kDescrSclFactor = 3.0;
constexpr double kDescrMagThresh = 0.2;

inline Raster decimate2(const Raster& img) {
    Raster out((img.width + 1) / 2, (img.height + 1) / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = img.at(2 * x, 2 * y);
    return out;
}

} // namespace sift_detail

inline ScaleSpace build_scale_space(const Raster& img, int octaves, int scales_per_octave,
                                    double sigma0) {
    if (octaves < 1 || scales_per_octave < 1)
        throw std::invalid_argument("build_scale_space: octaves and scales must be >= 1");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("build_scale_space: sigma0 must be > 0");
    {
        const int min_dim = std::min(img.width, img.height) >> (octaves - 1);
        if (min_dim < 2 * sift_detail::kBorder + 2)
            throw std::invalid_argument("build_scale_space: image too small for octave count");
    }

    ScaleSpace ss;
    ss.scales_per_octave = scales_per_octave;
    ss.sigma0 = sigma0;
    ss.octaves.resize(static_cast<std::size_t>(octaves));

    const int s = scales_per_octave;
    // Incremental blurs within an octave.
    std::vector<double> inc(static_cast<std::size_t>(s) + 3, 0.0);
    for (int i = 1; i < s + 3; ++i) {
        const double prev = sigma0 * std::pow(2.0, static_cast<double>(i - 1) / s);
        const double cur = sigma0 * std::pow(2.0, static_cast<double>(i) / s);
        inc[i] = std::sqrt(cur * cur - prev * prev);
    }

    for (int o = 0; o < octaves; ++o) {
        auto& oct = ss.octaves[o];
        oct.gauss.reserve(static_cast<std::size_t>(s) + 3);
        if (o == 0) {
            const double d2 = sigma0 * sigma0 - sift_detail::kInputBlur * sift_detail::kInputBlur;
            oct.gauss.push_back(d2 > 1e-6 ? gaussian_blur(img, std::sqrt(d2)) : img);
        } else {
            // Layer s of the previous octave carries blur 2*sigma0 in its own
            // units, which halves to sigma0 after decimation.
            oct.gauss.push_back(sift_detail::decimate2(ss.octaves[o - 1].gauss[s]));
        }
        for (int i = 1; i < s + 3; ++i) oct.gauss.push_back(gaussian_blur(oct.gauss[i - 1], inc[i]));

        oct.dog.reserve(static_cast<std::size_t>(s) + 2);
        for (int i = 0; i < s + 2; ++i) {
            Raster d(oct.gauss[i].width, oct.gauss[i].height);
            for (std::size_t p = 0; p < d.size(); ++p)
                d.data[p] = oct.gauss[i + 1].data[p] - oct.gauss[i].data[p];
            oct.dog.push_back(std::move(d));
        }
    }
    return ss;
}

namespace sift_detail {

inline bool is_extremum(const ScaleSpace::Octave& oct, int l, int x, int y) {
    const double v = oct.dog[l].at(x, y);
    if (v > 0) {
        for (int dl = -1; dl <= 1; ++dl)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dl == 0 && dx == 0 && dy == 0) continue;
                    if (v < oct.dog[l + dl].at(x + dx, y + dy)) return false;
                }
        return true;
    }
    if (v < 0) {
        for (int dl = -1; dl <= 1; ++dl)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dl == 0 && dx == 0 && dy == 0) continue;
                    if (v > oct.dog[l + dl].at(x + dx, y + dy)) return false;
                }
        return true;
    }
    return false;
}

// Solves the 3x3 system H * dst = -g by Cramer's rule; returns false when the
// Hessian is numerically singular.
inline bool solve3(const double h[3][3], const double g[3], double dst[3]) {
    const double det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
                       h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
                       h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
    if (std::abs(det) < 1e-18) return false;
    auto det3 = [](double a0, double a1, double a2, double b0, double b1, double b2, double c0,
                   double c1, double c2) {
        return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0);
    };
    dst[0] = -det3(g[0], h[0][1], h[0][2], g[1], h[1][1], h[1][2], g[2], h[2][1], h[2][2]) / det;
    dst[1] = -det3(h[0][0], g[0], h[0][2], h[1][0], g[1], h[1][2], h[2][0], g[2], h[2][2]) / det;
    dst[2] = -det3(h[0][0], h[0][1], g[0], h[1][0], h[1][1], g[1], h[2][0], h[2][1], g[2]) / det;
    return true;
}

} // namespace sift_detail

// 26-neighborhood DoG extrema refined by quadratic interpolation, filtered by
// contrast and principal-curvature ratio. Results sorted by (y, x, scale).
inline std::vector<Keypoint> detect_and_localize(const ScaleSpace& ss, double contrast_thresh,
                                                 double edge_ratio_thresh) {
    using namespace sift_detail;
    if (!(contrast_thresh > 0.0) || !(edge_ratio_thresh > 0.0))
        throw std::invalid_argument("detect_and_localize: thresholds must be > 0");
    const int s = ss.scales_per_octave;
    const double layer_thresh = contrast_thresh / s;
    std::vector<Keypoint> kps;

    for (int o = 0; o < static_cast<int>(ss.octaves.size()); ++o) {
        const auto& oct = ss.octaves[o];
        const int w = oct.dog[0].width, h = oct.dog[0].height;
        for (int l = 1; l <= s; ++l) {
            for (int y = kBorder; y < h - kBorder; ++y) {
                for (int x = kBorder; x < w - kBorder; ++x) {
                    if (std::abs(oct.dog[l].at(x, y)) < 0.5 * layer_thresh) continue;
                    if (!is_extremum(oct, l, x, y)) continue;

                    // Quadratic refinement in (x, y, layer).
                    int cx = x, cy = y, cl = l;
                    double off[3] = {0, 0, 0};
                    bool ok = false;
                    for (int step = 0; step < kMaxInterpSteps; ++step) {
                        const Raster& d0 = oct.dog[cl - 1];
                        const Raster& d1 = oct.dog[cl];
                        const Raster& d2 = oct.dog[cl + 1];
                        const double g[3] = {
                            0.5 * (d1.at(cx + 1, cy) - d1.at(cx - 1, cy)),
                            0.5 * (d1.at(cx, cy + 1) - d1.at(cx, cy - 1)),
                            0.5 * (d2.at(cx, cy) - d0.at(cx, cy))};
                        const double v = d1.at(cx, cy);
                        double H[3][3];
                        H[0][0] = d1.at(cx + 1, cy) + d1.at(cx - 1, cy) - 2 * v;
                        H[1][1] = d1.at(cx, cy + 1) + d1.at(cx, cy - 1) - 2 * v;
                        H[2][2] = d2.at(cx, cy) + d0.at(cx, cy) - 2 * v;
                        H[0][1] = H[1][0] =
                            0.25 * (d1.at(cx + 1, cy + 1) - d1.at(cx - 1, cy + 1) -
                                    d1.at(cx + 1, cy - 1) + d1.at(cx - 1, cy - 1));
                        H[0][2] = H[2][0] =
                            0.25 * (d2.at(cx + 1, cy) - d2.at(cx - 1, cy) - d0.at(cx + 1, cy) +
                                    d0.at(cx - 1, cy));
                        H[1][2] = H[2][1] =
                            0.25 * (d2.at(cx, cy + 1) - d2.at(cx, cy - 1) - d0.at(cx, cy + 1) +
                                    d0.at(cx, cy - 1));
                        if (!solve3(H, g, off)) break;
                        if (std::abs(off[0]) < 0.5 && std::abs(off[1]) < 0.5 &&
                            std::abs(off[2]) < 0.5) {
                            ok = true;
                            break;
                        }
                        cx += static_cast<int>(std::lround(off[0]));
                        cy += static_cast<int>(std::lround(off[1]));
                        cl += static_cast<int>(std::lround(off[2]));
                        if (cl < 1 || cl > s || cx < kBorder || cx >= w - kBorder ||
                            cy < kBorder || cy >= h - kBorder)
                            break;
                    }
                    if (!ok) continue;

                    const Raster& d1 = oct.dog[cl];
                    const double g0 = 0.5 * (d1.at(cx + 1, cy) - d1.at(cx - 1, cy));
                    const double g1 = 0.5 * (d1.at(cx, cy + 1) - d1.at(cx, cy - 1));
                    const double g2 =
                        0.5 * (oct.dog[cl + 1].at(cx, cy) - oct.dog[cl - 1].at(cx, cy));
                    const double contrast = d1.at(cx, cy) +
                                            0.5 * (g0 * off[0] + g1 * off[1] + g2 * off[2]);
                    if (std::abs(contrast) < layer_thresh) continue;

                    // Curvature ratio from the 2x2 spatial Hessian.
                    const double v = d1.at(cx, cy);
                    const double dxx = d1.at(cx + 1, cy) + d1.at(cx - 1, cy) - 2 * v;
                    const double dyy = d1.at(cx, cy + 1) + d1.at(cx, cy - 1) - 2 * v;
                    const double dxy = 0.25 * (d1.at(cx + 1, cy + 1) - d1.at(cx - 1, cy + 1) -
                                               d1.at(cx + 1, cy - 1) + d1.at(cx - 1, cy - 1));
                    const double tr = dxx + dyy;
                    const double det = dxx * dyy - dxy * dxy;
                    const double r = edge_ratio_thresh;
                    if (det <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det) continue;

                    Keypoint kp;
                    const double scale_factor = std::pow(2.0, o);
                    kp.x = (cx + off[0]) * scale_factor;
                    kp.y = (cy + off[1]) * scale_factor;
                    kp.scale = ss.sigma0 * std::pow(2.0, (cl + off[2]) / s) * scale_factor;
                    kp.response = std::abs(contrast);
                    kp.octave = o;
                    kp.layer = cl;
                    kps.push_back(kp);
                }
            }
        }
    }
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.scale < b.scale;
    });
    return kps;
}

// Gaussian-weighted 36-bin gradient histogram; the peak and any bin above 80%
// of it each emit one oriented keypoint, with parabolic peak interpolation.
inline std::vector<Keypoint> assign_orientations(const ScaleSpace& ss,
                                                 const std::vector<Keypoint>& kps) {
    using namespace sift_detail;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<Keypoint> out;
    out.reserve(kps.size());

    for (const Keypoint& kp : kps) {
        const auto& oct = ss.octaves[kp.octave];
        const Raster& L = oct.gauss[kp.layer];
        const double scale_factor = std::pow(2.0, kp.octave);
        const double xo = kp.x / scale_factor;
        const double yo = kp.y / scale_factor;
        const double scl_oct = kp.scale / scale_factor;
        const int radius = static_cast<int>(std::lround(kOrientationRadiusFactor * scl_oct));
        const double sigma_w = kOrientationSigmaFactor * scl_oct;
        const int xi = static_cast<int>(std::lround(xo));
        const int yi = static_cast<int>(std::lround(yo));

        double hist[kOrientationBins] = {0};
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                const int px = xi + dx, py = yi + dy;
                const double gx = L.at_mirror(px + 1, py) - L.at_mirror(px - 1, py);
                const double gy = L.at_mirror(px, py + 1) - L.at_mirror(px, py - 1);
                const double mag = std::hypot(gx, gy);
                if (mag <= 0.0) continue;
                const double wgt = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_w * sigma_w));
                double ang = std::atan2(gy, gx);
                if (ang < 0) ang += two_pi;
                int bin = static_cast<int>(std::lround(ang * kOrientationBins / two_pi));
                bin %= kOrientationBins;
                hist[bin] += wgt * mag;
            }
        }

        // Circular smoothing with the binomial 5-tap.
        double smoothed[kOrientationBins];
        for (int i = 0; i < kOrientationBins; ++i) {
            auto at = [&](int j) { return hist[(j + kOrientationBins) % kOrientationBins]; };
            smoothed[i] = (at(i - 2) + at(i + 2)) / 16.0 + 4.0 * (at(i - 1) + at(i + 1)) / 16.0 +
                          6.0 * at(i) / 16.0;
        }

        double peak = 0.0;
        for (double v : smoothed) peak = std::max(peak, v);
        if (peak <= 0.0) continue; // flat window, nothing to orient on

        for (int i = 0; i < kOrientationBins; ++i) {
            const double l = smoothed[(i + kOrientationBins - 1) % kOrientationBins];
            const double c = smoothed[i];
            const double r = smoothed[(i + 1) % kOrientationBins];
            if (c >= l && c >= r && c >= kOrientationPeakRatio * peak && c > 0.0) {
                const double denom = l - 2 * c + r;
                const double delta = std::abs(denom) < 1e-12 ? 0.0 : 0.5 * (l - r) / denom;
                double bin = i + delta;
                double ang = bin * two_pi / kOrientationBins;
                ang = std::fmod(ang + two_pi, two_pi);
                Keypoint oriented = kp;
                oriented.orientation = ang;
                out.push_back(oriented);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        if (a.scale != b.scale) return a.scale < b.scale;
        return a.orientation < b.orientation;
    });
    return out;
}

struct DescriptorStats {
    int dropped_border = 0;
    int dropped_degenerate = 0;
};

// Rotation-normalized 4x4x8 trilinear gradient histogram, clamped at 0.2 and
// renormalized to unit length. Keypoints whose sampling window would leave the
// image are dropped (counted in stats).
inline std::vector<Descriptor> compute_descriptors(const ScaleSpace& ss,
                                                   const std::vector<Keypoint>& kps,
                                                   DescriptorStats* stats = nullptr) {
    using namespace sift_detail;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const int d = kDescrWidth, n = kDescrBins;
    std::vector<Descriptor> out;
    DescriptorStats local{};

    for (const Keypoint& kp : kps) {
        const auto& oct = ss.octaves[kp.octave];
        const Raster& L = oct.gauss[kp.layer];
        const double scale_factor = std::pow(2.0, kp.octave);
        const double xo = kp.x / scale_factor;
        const double yo = kp.y / scale_factor;
        const double scl_oct = kp.scale / scale_factor;

        const double hist_width = kDescrSclFactor * scl_oct;
        const int radius = static_cast<int>(
            std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5));
        const int xi = static_cast<int>(std::lround(xo));
        const int yi = static_cast<int>(std::lround(yo));
        // Sampling reflects at borders; only windows wider than what one
        // reflection can supply are dropped.
        if (2 * radius + 1 > std::min(L.width, L.height)) {
            ++local.dropped_border;
            continue;
        }

        const double cos_t = std::cos(-kp.orientation);
        const double sin_t = std::sin(-kp.orientation);
        const double bins_per_rad = n / two_pi;
        const double exp_scale = -1.0 / (d * d * 0.5);

        // (d+2)^2 x (n+2) accumulation grid for clean trilinear folding.
        std::vector<double> hist(static_cast<std::size_t>(d + 2) * (d + 2) * (n + 2), 0.0);
        auto hidx = [&](int r, int c, int o) {
            return (static_cast<std::size_t>(r) * (d + 2) + c) * (n + 2) + o;
        };

        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                const double c_rot = (dx * cos_t - dy * sin_t) / hist_width;
                const double r_rot = (dx * sin_t + dy * cos_t) / hist_width;
                const double rbin = r_rot + d / 2.0 - 0.5;
                const double cbin = c_rot + d / 2.0 - 0.5;
                if (rbin <= -1 || rbin >= d || cbin <= -1 || cbin >= d) continue;
                const int px = xi + dx, py = yi + dy;
                const double gx = L.at_mirror(px + 1, py) - L.at_mirror(px - 1, py);
                const double gy = L.at_mirror(px, py + 1) - L.at_mirror(px, py - 1);
                const double mag = std::hypot(gx, gy);
                if (mag <= 0.0) continue;
                double ang = std::atan2(gy, gx) - kp.orientation;
                ang = std::fmod(ang + 2.0 * two_pi, two_pi);
                const double obin = ang * bins_per_rad;
                const double wgt = std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale);
                const double m = mag * wgt;

                int r0 = static_cast<int>(std::floor(rbin));
                int c0 = static_cast<int>(std::floor(cbin));
                int o0 = static_cast<int>(std::floor(obin));
                const double rf = rbin - r0, cf = cbin - c0, of = obin - o0;
                o0 %= n;

                for (int ri = 0; ri <= 1; ++ri)
                    for (int ci = 0; ci <= 1; ++ci)
                        for (int oi = 0; oi <= 1; ++oi) {
                            const double w = m * (ri ? rf : 1 - rf) * (ci ? cf : 1 - cf) *
                                             (oi ? of : 1 - of);
                            hist[hidx(r0 + ri + 1, c0 + ci + 1, (o0 + oi) % n)] += w;
                        }
            }
        }

        Descriptor desc;
        desc.owner = kp;
        int idx = 0;
        for (int r = 1; r <= d; ++r)
            for (int c = 1; c <= d; ++c)
                for (int o = 0; o < n; ++o) desc.v[idx++] = hist[hidx(r, c, o)];

        double norm = 0.0;
        for (double v : desc.v) norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            ++local.dropped_degenerate;
            continue;
        }
        for (double& v : desc.v) v = std::min(v / norm, kDescrMagThresh);
        norm = 0.0;
        for (double v : desc.v) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : desc.v) v /= norm;
        out.push_back(std::move(desc));
    }
    if (stats) *stats = local;
    return out;
}

inline double descriptor_distance(const Descriptor& a, const Descriptor& b) {
    double acc = 0.0;
    for (int i = 0; i < 128; ++i) {
        const double d = a.v[i] - b.v[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Lowe-ratio matching from `a` (slave side) into `b` (master side), one-to-one
// by best distance per target.
inline CorrespondenceSet match_descriptors(const std::vector<Descriptor>& a,
                                           const std::vector<Descriptor>& b, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("match_descriptors: ratio must be in (0,1)");
    CorrespondenceSet cs;
    cs.source = "sift";
    if (b.size() < 2) {
        std::cerr << "match_descriptors: fewer than 2 candidate descriptors, ratio test "
                     "undefined; returning empty set\n";
        return cs;
    }
    struct Candidate {
        int target;
        double dist;
        Correspondence c;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d1 = std::numeric_limits<double>::max(), d2 = d1;
        std::size_t best = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double dist = descriptor_distance(a[i], b[j]);
            if (dist < d1) {
                d2 = d1;
                d1 = dist;
                best = j;
            } else if (dist < d2) {
                d2 = dist;
            }
        }
        if (d2 <= 0.0) continue; // duplicate targets, ratio undefined -> reject
        if (d1 / d2 < ratio) {
            Correspondence c;
            c.slave = {a[i].owner.x, a[i].owner.y};
            c.master = {b[best].owner.x, b[best].owner.y};
            c.score = std::clamp(1.0 - d1 / d2, 0.0, 1.0);
            cands.push_back({static_cast<int>(best), d1, c});
        }
    }
    // Keep the best-distance proposal per target.
    std::vector<int> winner(b.size(), -1);
    for (std::size_t k = 0; k < cands.size(); ++k) {
        const int t = cands[k].target;
        if (winner[t] < 0 || cands[k].dist < cands[static_cast<std::size_t>(winner[t])].dist)
            winner[t] = static_cast<int>(k);
    }
    for (std::size_t t = 0; t < winner.size(); ++t)
        if (winner[t] >= 0) cs.pairs.push_back(cands[static_cast<std::size_t>(winner[t])].c);
    return cs;
}

// Line-oriented text dump: `x y scale orientation d0..d127` per record.
inline void save_descriptors(const std::string& path, const std::vector<Descriptor>& descs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(12);
    for (const auto& d : descs) {
        out << d.owner.x << " " << d.owner.y << " " << d.owner.scale << " "
            << d.owner.orientation;
        for (double v : d.v) out << " " << v;
        out << "\n";
    }
}

inline std::vector<Descriptor> load_descriptors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::vector<Descriptor> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Descriptor d;
        if (!(ss >> d.owner.x >> d.owner.y >> d.owner.scale >> d.owner.orientation))
            throw std::runtime_error("bad descriptor record at " + path + ":" +
                                     std::to_string(lineno));
        for (int i = 0; i < 128; ++i)
            if (!(ss >> d.v[i]))
                throw std::runtime_error("bad descriptor record at " + path + ":" +
                                         std::to_string(lineno));
        out.push_back(d);
    }
    return out;
}

} // namespace shapereg
