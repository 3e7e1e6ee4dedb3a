#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "shapereg/ga.hpp"
#include "shapereg/gmm.hpp"
#include "shapereg/rng.hpp"

namespace shapereg {

// Mixture density kernels: similarity from ensemble agreement of mixture
// responsibilities, normalized to unit diagonal.

struct KernelMatrix {
    int n = 0;
    std::vector<double> a;

    KernelMatrix() = default;
    explicit KernelMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    double max_asymmetry() const {
        double m = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) m = std::max(m, std::abs(at(i, j) - at(j, i)));
        return m;
    }
};

namespace mdk_detail {

// Ensemble-averaged responsibility dot product (the unnormalized Eq-form).
inline double raw_agreement(const MixtureEnsemble& ens, std::size_t i, std::size_t j) {
    const int M = ens.clusters;
    double acc = 0.0;
    for (int e = 0; e < ens.ensemble_size(); ++e) {
        const auto& r = ens.resp[e];
        double dot = 0.0;
        for (int m = 0; m < M; ++m) dot += r[i * M + m] * r[j * M + m];
        acc += dot;
    }
    return acc / ens.ensemble_size();
}

} // namespace mdk_detail

// Kernel value between two training points: ensemble-average responsibility
// agreement, normalized so K(i,i) = 1. Entries lie in [0,1] by Cauchy-Schwarz.
inline double mdk(const MixtureEnsemble& ens, int i, int j) {
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= ens.point_count ||
        static_cast<std::size_t>(j) >= ens.point_count)
        throw std::invalid_argument("mdk: point index out of range");
    const double kij = mdk_detail::raw_agreement(ens, static_cast<std::size_t>(i),
                                                 static_cast<std::size_t>(j));
    const double kii = mdk_detail::raw_agreement(ens, static_cast<std::size_t>(i),
                                                 static_cast<std::size_t>(i));
    const double kjj = mdk_detail::raw_agreement(ens, static_cast<std::size_t>(j),
                                                 static_cast<std::size_t>(j));
    return kij / std::sqrt(kii * kjj);
}

inline KernelMatrix mdk_matrix(const MixtureEnsemble& ens) {
    const int n = static_cast<int>(ens.point_count);
    KernelMatrix K(n);
    std::vector<double> diag(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        diag[i] = mdk_detail::raw_agreement(ens, static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(i));
    for (int i = 0; i < n; ++i) {
        K.at(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = mdk_detail::raw_agreement(ens, static_cast<std::size_t>(i),
                                                       static_cast<std::size_t>(j)) /
                             std::sqrt(diag[i] * diag[j]);
            K.at(i, j) = v;
            K.at(j, i) = v;
        }
    }
    return K;
}

// Kernel between arbitrary feature vectors (not necessarily training points);
// used when scoring unseen pixels against a trained support set.
inline double mdk_value(const MixtureEnsemble& ens, const FeatureVec& x, const FeatureVec& y) {
    double kxy = 0.0, kxx = 0.0, kyy = 0.0;
    for (const Mixture& mix : ens.members) {
        const auto px = mix.posterior(x);
        const auto py = mix.posterior(y);
        double dxy = 0.0, dxx = 0.0, dyy = 0.0;
        for (std::size_t m = 0; m < px.size(); ++m) {
            dxy += px[m] * py[m];
            dxx += px[m] * px[m];
            dyy += py[m] * py[m];
        }
        kxy += dxy;
        kxx += dxx;
        kyy += dyy;
    }
    return kxy / std::sqrt(kxx * kyy);
}

struct ModifiedKernelResult {
    KernelMatrix K;
    std::vector<int> excluded; // points with zero mixture likelihood
};

// Dynamically-learnt kernel variant: likelihood-product terms weighted by
// squared priors over the point's own density, two-sidedly symmetrized, then
// unit-diagonal normalized. Unlike the responsibility form above, the
// normalized off-diagonals are not mathematically confined to [0,1].
inline ModifiedKernelResult mdk_modified_matrix(const MixtureEnsemble& ens,
                                                const std::vector<FeatureVec>& features) {
    if (features.size() != ens.point_count)
        throw std::invalid_argument("mdk_modified_matrix: feature count mismatch");
    const int n = static_cast<int>(features.size());
    const int M = ens.clusters;
    const int E = ens.ensemble_size();

    // Per member: log component likelihoods and total likelihood per point.
    std::vector<std::vector<double>> comp_ll(static_cast<std::size_t>(E));
    std::vector<std::vector<double>> total(static_cast<std::size_t>(E));
    ModifiedKernelResult out;
    std::vector<bool> ok(static_cast<std::size_t>(n), true);
    for (int e = 0; e < E; ++e) {
        comp_ll[e].resize(static_cast<std::size_t>(n) * M);
        total[e].resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto ll = ens.members[e].component_log_likelihood(features[i]);
            for (int m = 0; m < M; ++m) comp_ll[e][static_cast<std::size_t>(i) * M + m] = ll[m];
            total[e][i] = ens.members[e].likelihood(features[i]);
            if (!(total[e][i] > 0.0)) ok[i] = false;
        }
    }
    for (int i = 0; i < n; ++i)
        if (!ok[i]) out.excluded.push_back(i);

    auto one_sided = [&](int i, int j) {
        double acc = 0.0;
        for (int e = 0; e < E; ++e) {
            const auto& mix = ens.members[e];
            double s = 0.0;
            for (int m = 0; m < M; ++m) {
                const double log_term =
                    2.0 * (comp_ll[e][static_cast<std::size_t>(i) * M + m] +
                           comp_ll[e][static_cast<std::size_t>(j) * M + m] +
                           std::log(std::max(mix.weights[m], 1e-300)));
                s += std::exp(log_term);
            }
            acc += s / total[e][i];
        }
        return acc / E;
    };

    KernelMatrix S(n);
    for (int i = 0; i < n; ++i) {
        if (!ok[i]) continue;
        for (int j = i; j < n; ++j) {
            if (!ok[j]) continue;
            const double v = i == j ? one_sided(i, i)
                                    : 0.5 * (one_sided(i, j) + one_sided(j, i));
            S.at(i, j) = v;
            S.at(j, i) = v;
        }
    }
    out.K = KernelMatrix(n);
    for (int i = 0; i < n; ++i) {
        if (!ok[i]) {
            out.K.at(i, i) = 1.0; // excluded rows stay neutral
            continue;
        }
        out.K.at(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            if (!ok[j]) continue;
            const double v = S.at(i, j) / std::sqrt(S.at(i, i) * S.at(j, j));
            out.K.at(i, j) = v;
            out.K.at(j, i) = v;
        }
    }
    return out;
}

inline double mdk_modified(const MixtureEnsemble& ens, const std::vector<FeatureVec>& features,
                           int i, int j) {
    const ModifiedKernelResult r = mdk_modified_matrix(ens, features);
    return r.K.at(i, j);
}

// Entrywise convex combination mu*Kx + (1-mu)*Ky.
inline KernelMatrix combine_kernels(const KernelMatrix& Kx, const KernelMatrix& Ky, double mu) {
    if (Kx.n != Ky.n) throw std::invalid_argument("combine_kernels: dimension mismatch");
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("combine_kernels: mu must be in [0,1]");
    KernelMatrix out(Kx.n);
    for (std::size_t i = 0; i < out.a.size(); ++i)
        out.a[i] = mu * Kx.a[i] + (1.0 - mu) * Ky.a[i];
    return out;
}

// Deterministic kernel k-medoids (farthest-first init, ties to lower index).
inline std::vector<int> kernel_kmedoids(const KernelMatrix& K, int clusters) {
    const int n = K.n;
    clusters = std::min(clusters, n);
    auto dist = [&](int i, int j) { return K.at(i, i) + K.at(j, j) - 2.0 * K.at(i, j); };

    std::vector<int> medoids;
    {
        // start from the point with the largest total distance (an extreme one)
        int first = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += dist(i, j);
            if (s > best) {
                best = s;
                first = i;
            }
        }
        medoids.push_back(first);
        while (static_cast<int>(medoids.size()) < clusters) {
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                double dmin = std::numeric_limits<double>::max();
                for (int m : medoids) dmin = std::min(dmin, dist(i, m));
                if (dmin > far_d) {
                    far_d = dmin;
                    far = i;
                }
            }
            medoids.push_back(far);
        }
    }

    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 20; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::max();
            for (std::size_t c = 0; c < medoids.size(); ++c) {
                const double d = dist(i, medoids[c]);
                if (d < bd - 1e-15) {
                    bd = d;
                    best = static_cast<int>(c);
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            int best = medoids[c];
            double bd = std::numeric_limits<double>::max();
            for (int i = 0; i < n; ++i) {
                if (assign[i] != static_cast<int>(c)) continue;
                double s = 0.0;
                for (int j = 0; j < n; ++j)
                    if (assign[j] == static_cast<int>(c)) s += dist(i, j);
                if (s < bd - 1e-15) {
                    bd = s;
                    best = i;
                }
            }
            if (best != medoids[c]) {
                medoids[c] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return assign;
}

// Best-permutation label agreement in [0,1]; practical for <= 6 classes.
inline double label_agreement(const std::vector<int>& pred, const std::vector<int>& truth,
                              int classes) {
    if (pred.size() != truth.size() || pred.empty())
        throw std::invalid_argument("label_agreement: size mismatch");
    std::vector<int> perm(static_cast<std::size_t>(classes));
    for (int i = 0; i < classes; ++i) perm[i] = i;
    double best = 0.0;
    do {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (pred[i] < classes && perm[pred[i]] == truth[i]) ++hits;
        best = std::max(best, static_cast<double>(hits) / pred.size());
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

struct MuTuneResult {
    double mu = 0.5;
    double agreement = 0.0;
};

// GA over the scalar mu in [0,1] maximizing clustering agreement with the
// reference labels on a held-out tile. Returns 0.5 unless the optimum beats
// the mu=0.5 baseline outright.
inline MuTuneResult tune_mu_ga(const KernelMatrix& Kx, const KernelMatrix& Ky,
                               const std::vector<int>& reference_labels, int classes,
                               const GAParams& ga, std::uint64_t rng_seed) {
    if (Kx.n != Ky.n) throw std::invalid_argument("tune_mu_ga: dimension mismatch");
    if (static_cast<int>(reference_labels.size()) != Kx.n)
        throw std::invalid_argument("tune_mu_ga: unlabeled reference tile");
    if (classes < 2) throw std::invalid_argument("tune_mu_ga: need >= 2 classes");
    ga.validate();

    auto fitness = [&](double mu) {
        const KernelMatrix K = combine_kernels(Kx, Ky, mu);
        return label_agreement(kernel_kmedoids(K, classes), reference_labels, classes);
    };

    const double base = fitness(0.5);
    Rng rng(rng_seed);
    std::vector<double> pop(static_cast<std::size_t>(ga.population));
    std::vector<double> fit(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        pop[i] = i == 0 ? 0.5 : rng.uniform();
        fit[i] = fitness(pop[i]);
    }
    auto best_index = [&]() {
        std::size_t b = 0;
        for (std::size_t i = 1; i < pop.size(); ++i)
            if (fit[i] > fit[b]) b = i;
        return b;
    };
    for (int gen = 0; gen < ga.generations; ++gen) {
        std::vector<double> next_pop, next_fit;
        const std::size_t b = best_index();
        next_pop.push_back(pop[b]); // elitism of one is plenty in 1-D
        next_fit.push_back(fit[b]);
        while (next_pop.size() < pop.size()) {
            auto pick = [&]() {
                int w = rng.index(static_cast<int>(pop.size()));
                for (int k = 1; k < ga.tournament; ++k) {
                    const int c = rng.index(static_cast<int>(pop.size()));
                    if (fit[c] > fit[w]) w = c;
                }
                return w;
            };
            double child;
            const int pa = pick(), pb = pick();
            if (rng.uniform() < ga.crossover_rate) {
                const double alpha = rng.uniform();
                child = alpha * pop[pa] + (1.0 - alpha) * pop[pb];
            } else {
                child = pop[pa];
            }
            if (rng.uniform() < std::max(ga.mutation_rate, 0.2))
                child += rng.gaussian(0.0, 0.1);
            child = std::clamp(child, 0.0, 1.0);
            next_pop.push_back(child);
            next_fit.push_back(fitness(child));
        }
        pop = std::move(next_pop);
        fit = std::move(next_fit);
    }
    const std::size_t b = best_index();
    MuTuneResult res;
    if (fit[b] > base + 1e-12) {
        res.mu = pop[b];
        res.agreement = fit[b];
    } else {
        res.mu = 0.5;
        res.agreement = base;
    }
    return res;
}

} // namespace shapereg
