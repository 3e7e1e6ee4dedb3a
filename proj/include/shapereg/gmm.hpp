#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "shapereg/rng.hpp"

namespace shapereg {

// Ensemble of expectation-maximization Gaussian mixture fits with independent
// random initializations. Each member exposes responsibilities P(C_m | x),
// per-component likelihoods p(x | C_m), and the total density p(x), which is
// everything the mixture-density kernels need.

using FeatureVec = std::vector<double>;

namespace gmm_detail {

// In-place Cholesky of a d x d row-major SPD matrix; retries with a growing
// ridge when the input is degenerate.
inline void cholesky_with_ridge(std::vector<double>& a, int d, double ridge) {
    std::vector<double> backup = a;
    for (int attempt = 0; attempt < 8; ++attempt) {
        bool ok = true;
        for (int i = 0; i < d && ok; ++i) {
            for (int j = 0; j <= i; ++j) {
                double sum = a[static_cast<std::size_t>(i) * d + j];
                for (int k = 0; k < j; ++k)
                    sum -= a[static_cast<std::size_t>(i) * d + k] *
                           a[static_cast<std::size_t>(j) * d + k];
                if (i == j) {
                    if (sum <= 0.0) {
                        ok = false;
                        break;
                    }
                    a[static_cast<std::size_t>(i) * d + j] = std::sqrt(sum);
                } else {
                    a[static_cast<std::size_t>(i) * d + j] =
                        sum / a[static_cast<std::size_t>(j) * d + j];
                }
            }
        }
        if (ok) {
            // zero the strict upper triangle for cleanliness
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j) a[static_cast<std::size_t>(i) * d + j] = 0.0;
            return;
        }
        a = backup;
        for (int i = 0; i < d; ++i) a[static_cast<std::size_t>(i) * d + i] += ridge;
        ridge *= 10.0;
    }
    throw std::runtime_error("cholesky_with_ridge: matrix not repairable");
}

} // namespace gmm_detail

struct GaussianComponent {
    FeatureVec mean;
    std::vector<double> chol; // lower-triangular Cholesky factor of the covariance
    double log_norm = 0.0;    // -0.5 d log(2 pi) - sum(log L_ii)

    int dim() const { return static_cast<int>(mean.size()); }

    void finalize_from_cov(std::vector<double> cov) {
        const int d = dim();
        gmm_detail::cholesky_with_ridge(cov, d, 1e-6);
        chol = std::move(cov);
        double log_det_half = 0.0;
        for (int i = 0; i < d; ++i) log_det_half += std::log(chol[static_cast<std::size_t>(i) * d + i]);
        log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi) - log_det_half;
    }

    double log_density(const FeatureVec& x) const {
        const int d = dim();
        // forward solve L t = (x - mean); quad = |t|^2
        std::vector<double> t(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            double s = x[i] - mean[i];
            for (int k = 0; k < i; ++k) s -= chol[static_cast<std::size_t>(i) * d + k] * t[k];
            t[i] = s / chol[static_cast<std::size_t>(i) * d + i];
        }
        double quad = 0.0;
        for (int i = 0; i < d; ++i) quad += t[i] * t[i];
        return log_norm - 0.5 * quad;
    }
};

struct Mixture {
    std::vector<double> weights;
    std::vector<GaussianComponent> comps;

    int cluster_count() const { return static_cast<int>(comps.size()); }

    std::vector<double> component_log_likelihood(const FeatureVec& x) const {
        std::vector<double> ll(comps.size());
        for (std::size_t m = 0; m < comps.size(); ++m) ll[m] = comps[m].log_density(x);
        return ll;
    }

    // P(C_m | x), numerically via log-sum-exp.
    std::vector<double> posterior(const FeatureVec& x) const {
        std::vector<double> ll = component_log_likelihood(x);
        double mx = -std::numeric_limits<double>::max();
        for (std::size_t m = 0; m < ll.size(); ++m) {
            ll[m] += std::log(std::max(weights[m], 1e-300));
            mx = std::max(mx, ll[m]);
        }
        double sum = 0.0;
        for (double& v : ll) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : ll) v /= sum;
        return ll;
    }

    // p(x) = sum_m pi_m p(x | C_m)
    double likelihood(const FeatureVec& x) const {
        const std::vector<double> ll = component_log_likelihood(x);
        double acc = 0.0;
        for (std::size_t m = 0; m < ll.size(); ++m)
            acc += weights[m] * std::exp(ll[m]);
        return acc;
    }
};

struct MixtureEnsemble {
    std::vector<Mixture> members;
    // Cached training-point responsibilities: resp[e][i*M + m].
    std::vector<std::vector<double>> resp;
    std::size_t point_count = 0;
    int clusters = 0;

    int ensemble_size() const { return static_cast<int>(members.size()); }
};

// E independently initialized EM fits (k-means++ seeding per member with a
// member-indexed RNG stream), run to responsibility change < 1e-6 or 200
// iterations. Degenerate covariances are ridge-regularized, never fatal.
inline MixtureEnsemble fit_mixture_ensemble(const std::vector<FeatureVec>& features, int M,
                                            int E, std::uint64_t rng_seed) {
    if (M < 1 || E < 1) throw std::invalid_argument("fit_mixture_ensemble: M, E must be >= 1");
    if (features.empty()) throw std::invalid_argument("fit_mixture_ensemble: no features");
    const int d = static_cast<int>(features[0].size());
    for (const auto& f : features)
        if (static_cast<int>(f.size()) != d)
            throw std::invalid_argument("fit_mixture_ensemble: inconsistent feature dims");
    {
        // need at least M distinct vectors
        std::vector<FeatureVec> uniq = features;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (static_cast<int>(uniq.size()) < M)
            throw std::invalid_argument("fit_mixture_ensemble: fewer distinct points than clusters");
    }
    const std::size_t n = features.size();
    const Rng base(rng_seed);

    MixtureEnsemble ens;
    ens.point_count = n;
    ens.clusters = M;

    for (int e = 0; e < E; ++e) {
        Rng rng = base.fork(static_cast<std::uint64_t>(e));

        // k-means++ seeding
        std::vector<FeatureVec> centers;
        centers.push_back(features[rng.below(n)]);
        std::vector<double> d2(n, 0.0);
        while (static_cast<int>(centers.size()) < M) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::max();
                for (const auto& c : centers) {
                    double acc = 0.0;
                    for (int k = 0; k < d; ++k) {
                        const double df = features[i][k] - c[k];
                        acc += df * df;
                    }
                    best = std::min(best, acc);
                }
                d2[i] = best;
                total += best;
            }
            if (total <= 0.0) {
                centers.push_back(features[rng.below(n)]);
                continue;
            }
            double pick = rng.uniform() * total;
            std::size_t chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                pick -= d2[i];
                if (pick <= 0.0) {
                    chosen = i;
                    break;
                }
            }
            centers.push_back(features[chosen]);
        }

        Mixture mix;
        mix.weights.assign(static_cast<std::size_t>(M), 1.0 / M);
        // initial covariance: global diagonal variance (+ridge)
        std::vector<double> global_var(static_cast<std::size_t>(d), 0.0);
        {
            FeatureVec mean(static_cast<std::size_t>(d), 0.0);
            for (const auto& f : features)
                for (int k = 0; k < d; ++k) mean[k] += f[k];
            for (double& v : mean) v /= static_cast<double>(n);
            for (const auto& f : features)
                for (int k = 0; k < d; ++k)
                    global_var[k] += (f[k] - mean[k]) * (f[k] - mean[k]);
            for (double& v : global_var) v = v / static_cast<double>(n) + 1e-6;
        }
        for (int m = 0; m < M; ++m) {
            GaussianComponent g;
            g.mean = centers[m];
            std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
            for (int k = 0; k < d; ++k) cov[static_cast<std::size_t>(k) * d + k] = global_var[k];
            g.finalize_from_cov(std::move(cov));
            mix.comps.push_back(std::move(g));
        }

        std::vector<double> resp(n * static_cast<std::size_t>(M), 0.0);
        std::vector<double> prev_resp;
        for (int iter = 0; iter < 200; ++iter) {
            // E-step
            for (std::size_t i = 0; i < n; ++i) {
                const std::vector<double> post = mix.posterior(features[i]);
                for (int m = 0; m < M; ++m) resp[i * M + m] = post[m];
            }
            if (!prev_resp.empty()) {
                double delta = 0.0;
                for (std::size_t i = 0; i < resp.size(); ++i)
                    delta = std::max(delta, std::abs(resp[i] - prev_resp[i]));
                if (delta < 1e-6) break;
            }
            prev_resp = resp;

            // M-step
            for (int m = 0; m < M; ++m) {
                double nk = 0.0;
                FeatureVec mean(static_cast<std::size_t>(d), 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const double r = resp[i * M + m];
                    nk += r;
                    for (int k = 0; k < d; ++k) mean[k] += r * features[i][k];
                }
                nk = std::max(nk, 1e-12);
                for (double& v : mean) v /= nk;
                std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const double r = resp[i * M + m];
                    if (r <= 0.0) continue;
                    for (int a = 0; a < d; ++a)
                        for (int b = 0; b <= a; ++b)
                            cov[static_cast<std::size_t>(a) * d + b] +=
                                r * (features[i][a] - mean[a]) * (features[i][b] - mean[b]);
                }
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b <= a; ++b) {
                        cov[static_cast<std::size_t>(a) * d + b] /= nk;
                        cov[static_cast<std::size_t>(b) * d + a] =
                            cov[static_cast<std::size_t>(a) * d + b];
                    }
                for (int a = 0; a < d; ++a) cov[static_cast<std::size_t>(a) * d + a] += 1e-6;
                mix.weights[m] = nk / static_cast<double>(n);
                mix.comps[m].mean = mean;
                mix.comps[m].finalize_from_cov(std::move(cov));
            }
            double wsum = 0.0;
            for (double w : mix.weights) wsum += w;
            for (double& w : mix.weights) w /= wsum;
        }

        ens.members.push_back(std::move(mix));
        ens.resp.push_back(std::move(resp));
    }
    return ens;
}

} // namespace shapereg
