#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "shapereg/canny.hpp"
#include "shapereg/cellular.hpp"
#include "shapereg/components.hpp"
#include "shapereg/convolve.hpp"
#include "shapereg/gmm.hpp"
#include "shapereg/mdk.hpp"
#include "shapereg/raster.hpp"
#include "shapereg/rng.hpp"

namespace shapereg {

// Random-field segmentation: discriminative per-site scores plus a
// data-dependent Potts smoothing term, minimized by iterated conditional
// modes from a seed-grown initialization.

struct ClusterSeeds {
    std::vector<Point> positions; // one seed pixel per cluster; index = label

    int count() const { return static_cast<int>(positions.size()); }

    void validate(int width, int height) const {
        if (positions.empty()) throw std::invalid_argument("ClusterSeeds: need >= 1 seed");
        for (const Point& p : positions)
            if (p.x < 0 || p.x >= width || p.y < 0 || p.y >= height)
                throw std::invalid_argument("ClusterSeeds: seed outside image");
    }
};

struct UnaryScores {
    int width = 0;
    int height = 0;
    int num_labels = 0;
    std::vector<double> s; // log-domain scores, higher = better match

    UnaryScores() = default;
    UnaryScores(int w, int h, int labels)
        : width(w), height(h), num_labels(labels),
          s(static_cast<std::size_t>(w) * h * labels, 0.0) {}

    double& at(int x, int y, int l) {
        return s[(static_cast<std::size_t>(y) * width + x) * num_labels + l];
    }
    double at(int x, int y, int l) const {
        return s[(static_cast<std::size_t>(y) * width + x) * num_labels + l];
    }
};

struct LabelField {
    int width = 0;
    int height = 0;
    int num_labels = 0;
    std::vector<int> labels;
    UnaryScores unary;
    double beta = 0.0;

    int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

// Clustering parameters from the abstract object mask: one cluster per
// connected component plus one background class (label 0). Component seeds are
// centroids snapped to the nearest in-component pixel; the background seed is
// the background pixel farthest from every component.
inline ClusterSeeds derive_cluster_params(const BinaryMask& mask) {
    const ComponentSet comps = connected_components(mask);
    const auto info = component_info(comps);

    ClusterSeeds seeds;
    // Background: chamfer distance from mask pixels, take the max (ties to
    // scan order).
    EdgeMap as_edges;
    as_edges.width = mask.width;
    as_edges.height = mask.height;
    as_edges.mask = mask.v;
    as_edges.gradient_mag.assign(mask.v.size(), 0.0);
    const Raster dist = distance_to_edges(as_edges);
    int bx = 0, by = 0;
    double best = -1.0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (!mask.at(x, y) && dist.at(x, y) > best) {
                best = dist.at(x, y);
                bx = x;
                by = y;
            }
    seeds.positions.push_back({static_cast<double>(bx), static_cast<double>(by)});
    for (const auto& ci : info)
        seeds.positions.push_back({static_cast<double>(ci.seed_x), static_cast<double>(ci.seed_y)});
    return seeds;
}

// Synchronous CA-style growth: each unlabeled pixel adopts the label of the
// 4-neighbor region whose seed-neighborhood mean intensity is closest to its
// own, until the field is covered.
inline std::vector<int> region_grow_labels(const Raster& img, const ClusterSeeds& seeds) {
    seeds.validate(img.width, img.height);
    const int L = seeds.count();
    std::vector<int> labels(img.size(), -1);
    std::vector<double> seed_mean(static_cast<std::size_t>(L), 0.0);
    for (int l = 0; l < L; ++l) {
        const int sx = static_cast<int>(seeds.positions[l].x);
        const int sy = static_cast<int>(seeds.positions[l].y);
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) acc += img.at_mirror(sx + dx, sy + dy);
        seed_mean[l] = acc / 9.0;
        labels[static_cast<std::size_t>(sy) * img.width + sx] = l;
    }
    const int max_rounds = img.width + img.height + 2;
    for (int round = 0; round < max_rounds; ++round) {
        bool any = false;
        std::vector<int> next = labels;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
                if (labels[i] >= 0) continue;
                int best_label = -1;
                double best_d = std::numeric_limits<double>::max();
                const int nx[4] = {x - 1, x + 1, x, x};
                const int ny[4] = {y, y, y - 1, y + 1};
                for (int k = 0; k < 4; ++k) {
                    if (!img.in_bounds(nx[k], ny[k])) continue;
                    const int nl = labels[static_cast<std::size_t>(ny[k]) * img.width + nx[k]];
                    if (nl < 0) continue;
                    const double d = std::abs(img.at(x, y) - seed_mean[nl]);
                    if (d < best_d || (d == best_d && nl < best_label)) {
                        best_d = d;
                        best_label = nl;
                    }
                }
                if (best_label >= 0) {
                    next[i] = best_label;
                    any = true;
                }
            }
        labels = std::move(next);
        if (!any) break;
    }
    for (int& l : labels)
        if (l < 0) l = 0;
    return labels;
}

// Energy of a labeling: negated unary scores plus the data-dependent Potts
// reward V = beta * (1 - |I_i - I_j|) for equal labels over 4-neighbor pairs.
inline double svrf_energy(const std::vector<int>& labels, const UnaryScores& unary,
                          const Raster& img, double beta) {
    double e = 0.0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int l = labels[static_cast<std::size_t>(y) * img.width + x];
            e -= unary.at(x, y, l);
            if (x + 1 < img.width) {
                const int r = labels[static_cast<std::size_t>(y) * img.width + x + 1];
                if (r == l)
                    e -= beta * (1.0 - std::min(1.0, std::abs(img.at(x, y) - img.at(x + 1, y))));
            }
            if (y + 1 < img.height) {
                const int d = labels[static_cast<std::size_t>(y + 1) * img.width + x];
                if (d == l)
                    e -= beta * (1.0 - std::min(1.0, std::abs(img.at(x, y) - img.at(x, y + 1))));
            }
        }
    return e;
}

struct IcmResult {
    std::vector<double> energy_history; // energy after each sweep (plus initial)
    int sweeps = 0;
    bool converged = false;
};

// Serial sitewise minimization, raster scan with alternating direction per
// sweep. Energy is non-increasing by construction.
inline IcmResult icm_refine(std::vector<int>& labels, const UnaryScores& unary,
                            const Raster& img, double beta, int max_sweeps) {
    const int w = img.width, h = img.height, L = unary.num_labels;
    IcmResult res;
    res.energy_history.push_back(svrf_energy(labels, unary, img, beta));
    auto contrast = [&](int x, int y, int qx, int qy) {
        return 1.0 - std::min(1.0, std::abs(img.at(x, y) - img.at(qx, qy)));
    };
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool changed = false;
        const bool forward = sweep % 2 == 0;
        for (int t = 0; t < w * h; ++t) {
            const int idx = forward ? t : w * h - 1 - t;
            const int x = idx % w, y = idx / w;
            int best_l = labels[static_cast<std::size_t>(idx)];
            double best_e = std::numeric_limits<double>::max();
            for (int l = 0; l < L; ++l) {
                double e = -unary.at(x, y, l);
                const int nx[4] = {x - 1, x + 1, x, x};
                const int ny[4] = {y, y, y - 1, y + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
                    if (labels[static_cast<std::size_t>(ny[k]) * w + nx[k]] == l)
                        e -= beta * contrast(x, y, nx[k], ny[k]);
                }
                if (e < best_e - 1e-15 || (e < best_e + 1e-15 && l < best_l)) {
                    best_e = e;
                    best_l = l;
                }
            }
            if (best_l != labels[static_cast<std::size_t>(idx)]) {
                labels[static_cast<std::size_t>(idx)] = best_l;
                changed = true;
            }
        }
        res.energy_history.push_back(svrf_energy(labels, unary, img, beta));
        res.sweeps = sweep + 1;
        if (!changed) {
            res.converged = true;
            break;
        }
    }
    return res;
}

// Seed-grown initialization followed by multi-start ICM: the region-grown
// labeling is the primary start, with the unary-argmax field and the uniform
// fields as alternates, keeping the lowest final energy. Sitewise ICM alone is
// a local optimizer; the extra deterministic starts let it reach the global
// minimum on the toy instances the contract demands.
inline LabelField svrf_segment(const Raster& img, const UnaryScores& unary, double beta,
                               const ClusterSeeds& seeds, int max_sweeps) {
    if (unary.width != img.width || unary.height != img.height)
        throw std::invalid_argument("svrf_segment: unary grid dimensions mismatch");
    if (unary.num_labels != seeds.count())
        throw std::invalid_argument(
            "svrf_segment: unary model class count != requested label count");
    if (unary.num_labels < 2)
        throw std::invalid_argument("svrf_segment: need >= 2 classes for inference");
    if (beta < 0.0) throw std::invalid_argument("svrf_segment: beta must be >= 0");

    std::vector<std::vector<int>> starts;
    starts.push_back(region_grow_labels(img, seeds));
    {
        std::vector<int> argmax(img.size(), 0);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                int best = 0;
                for (int l = 1; l < unary.num_labels; ++l)
                    if (unary.at(x, y, l) > unary.at(x, y, best)) best = l;
                argmax[static_cast<std::size_t>(y) * img.width + x] = best;
            }
        starts.push_back(std::move(argmax));
    }
    for (int l = 0; l < unary.num_labels; ++l)
        starts.emplace_back(img.size(), l);

    std::vector<int> labels;
    double best_energy = std::numeric_limits<double>::max();
    for (auto& start : starts) {
        icm_refine(start, unary, img, beta, max_sweeps);
        const double e = svrf_energy(start, unary, img, beta);
        if (e < best_energy) {
            best_energy = e;
            labels = std::move(start);
        }
    }

    LabelField lf;
    lf.width = img.width;
    lf.height = img.height;
    lf.num_labels = unary.num_labels;
    lf.labels = std::move(labels);
    lf.unary = unary;
    lf.beta = beta;
    return lf;
}

// Per-site feature vector: intensity, 3x3 mean, 3x3 standard deviation,
// gradient magnitude, distance to the nearest edge.
inline std::vector<FeatureVec> site_features(const Raster& img, const EdgeMap& edges) {
    if (edges.width != img.width || edges.height != img.height)
        throw std::invalid_argument("site_features: edge map dimensions mismatch");
    const Raster dist = distance_to_edges(edges);
    const double dist_norm = 1.0 / std::max(img.width, img.height);
    std::vector<FeatureVec> feats;
    feats.reserve(img.size());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double sum = 0.0, sq = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const double v = img.at_mirror(x + dx, y + dy);
                    sum += v;
                    sq += v * v;
                }
            const double mean = sum / 9.0;
            const double var = std::max(0.0, sq / 9.0 - mean * mean);
            feats.push_back({img.at(x, y), mean, std::sqrt(var), edges.mag(x, y),
                             dist.at(x, y) * dist_norm});
        }
    return feats;
}

// Flattened ensemble responsibilities (E*M values) plus the agreement
// self-dot; the normalized spectral kernel is then a plain dot product.
inline std::vector<double> flat_responsibilities(const MixtureEnsemble& ens,
                                                 const FeatureVec& f) {
    std::vector<double> r;
    r.reserve(static_cast<std::size_t>(ens.ensemble_size()) * ens.clusters);
    for (const Mixture& mix : ens.members) {
        const auto post = mix.posterior(f);
        r.insert(r.end(), post.begin(), post.end());
    }
    return r;
}

// One-vs-rest kernel scorer trained with the hinge loss (kernelized Pegasos)
// on seed-region samples. The kernel is the convex blend of the mixture
// density kernel on features and the same-component indicator. Support-side
// responsibilities are cached so scoring a pixel costs one posterior
// evaluation plus a dot product per support vector.
struct KernelUnaryModel {
    int num_classes = 0;
    double mu = 0.5;
    double lambda = 0.01;
    const MixtureEnsemble* ensemble = nullptr; // not owned
    std::vector<FeatureVec> support_feats;
    std::vector<int> support_comp;
    std::vector<std::vector<double>> support_resp;
    std::vector<double> support_self;
    std::vector<std::vector<double>> coef; // per class, per support vector

    double kernel_from_resp(const std::vector<double>& rf, double self_f, int comp,
                            std::size_t sv) const {
        double dot = 0.0;
        const auto& rs = support_resp[sv];
        for (std::size_t k = 0; k < rf.size(); ++k) dot += rf[k] * rs[k];
        const double spectral = dot / std::sqrt(self_f * support_self[sv]);
        const double spatial = comp == support_comp[sv] ? 1.0 : 0.0;
        return mu * spectral + (1.0 - mu) * spatial;
    }

    double kernel(const FeatureVec& f, int comp, std::size_t sv) const {
        const std::vector<double> rf = flat_responsibilities(*ensemble, f);
        double self = 0.0;
        for (double v : rf) self += v * v;
        return kernel_from_resp(rf, self, comp, sv);
    }

    std::vector<double> scores(const FeatureVec& f, int comp) const {
        const std::vector<double> rf = flat_responsibilities(*ensemble, f);
        double self = 0.0;
        for (double v : rf) self += v * v;
        std::vector<double> out(static_cast<std::size_t>(num_classes), 0.0);
        for (std::size_t sv = 0; sv < support_feats.size(); ++sv) {
            const double k = kernel_from_resp(rf, self, comp, sv);
            for (int c = 0; c < num_classes; ++c) out[c] += coef[c][sv] * k;
        }
        return out;
    }
};

inline KernelUnaryModel train_kernel_unary(const std::vector<FeatureVec>& feats,
                                           const std::vector<int>& comps,
                                           const std::vector<int>& labels, int num_classes,
                                           const MixtureEnsemble& ens, double mu,
                                           int iterations, std::uint64_t rng_seed) {
    if (feats.size() != labels.size() || feats.size() != comps.size() || feats.empty())
        throw std::invalid_argument("train_kernel_unary: inconsistent training arrays");
    if (num_classes < 2) throw std::invalid_argument("train_kernel_unary: need >= 2 classes");

    KernelUnaryModel model;
    model.num_classes = num_classes;
    model.mu = mu;
    model.ensemble = &ens;
    model.support_feats = feats;
    model.support_comp = comps;
    for (const auto& f : feats) {
        model.support_resp.push_back(flat_responsibilities(ens, f));
        double self = 0.0;
        for (double v : model.support_resp.back()) self += v * v;
        model.support_self.push_back(self);
    }

    const std::size_t n = feats.size();
    // Precompute the train-side Gram matrix once.
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram[i * n + j] = model.kernel(feats[i], comps[i], j);

    const double lambda = model.lambda;
    Rng rng(rng_seed);
    model.coef.assign(static_cast<std::size_t>(num_classes), std::vector<double>(n, 0.0));
    for (int c = 0; c < num_classes; ++c) {
        std::vector<double> alpha(n, 0.0);
        for (int t = 1; t <= iterations; ++t) {
            const std::size_t i = rng.below(n);
            const double yi = labels[i] == c ? 1.0 : -1.0;
            double f = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (alpha[j] == 0.0) continue;
                const double yj = labels[j] == c ? 1.0 : -1.0;
                f += alpha[j] * yj * gram[j * n + i];
            }
            f /= lambda * t;
            if (yi * f < 1.0) alpha[i] += 1.0;
        }
        const double scale = 1.0 / (lambda * iterations);
        for (std::size_t j = 0; j < n; ++j) {
            const double yj = labels[j] == c ? 1.0 : -1.0;
            model.coef[c][j] = alpha[j] * yj * scale;
        }
    }
    return model;
}

// Log-softmax unary grid from the trained scorer.
inline UnaryScores unary_from_model(const KernelUnaryModel& model,
                                    const std::vector<FeatureVec>& feats,
                                    const std::vector<int>& comps, int width, int height) {
    if (feats.size() != static_cast<std::size_t>(width) * height || feats.size() != comps.size())
        throw std::invalid_argument("unary_from_model: feature grid mismatch");
    UnaryScores u(width, height, model.num_classes);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            const std::vector<double> s = model.scores(feats[i], comps[i]);
            double mx = -std::numeric_limits<double>::max();
            for (double v : s) mx = std::max(mx, v);
            double lse = 0.0;
            for (double v : s) lse += std::exp(v - mx);
            lse = mx + std::log(lse);
            for (int c = 0; c < model.num_classes; ++c) u.at(x, y, c) = s[c] - lse;
        }
    return u;
}

} // namespace shapereg
