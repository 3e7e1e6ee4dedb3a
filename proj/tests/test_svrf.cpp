#include <catch_amalgamated.hpp>

#include <cmath>

#include "shapereg/canny.hpp"
#include "shapereg/rng.hpp"
#include "shapereg/svrf.hpp"

using namespace shapereg;

namespace {

UnaryScores random_unary(int w, int h, int L, Rng& rng, double spread) {
    UnaryScores u(w, h, L);
    for (double& v : u.s) v = rng.gaussian(0.0, spread);
    return u;
}

Raster random_image(int w, int h, Rng& rng) {
    Raster img(w, h);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

double exhaustive_min_energy(const UnaryScores& u, const Raster& img, double beta) {
    const int n = u.width * u.height;
    REQUIRE(n <= 16);
    double best = std::numeric_limits<double>::max();
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (std::uint32_t code = 0; code < (1u << n); ++code) {
        for (int i = 0; i < n; ++i) labels[i] = (code >> i) & 1;
        best = std::min(best, svrf_energy(labels, u, img, beta));
    }
    return best;
}

} // namespace

TEST_CASE("beta = 0 reduces to per-pixel argmax of the unary scores", "[svrf]") {
    Rng rng(307);
    const int w = 12, h = 9, L = 3;
    UnaryScores u = random_unary(w, h, L, rng, 1.0);
    Raster img = random_image(w, h, rng);
    ClusterSeeds seeds;
    seeds.positions = {{0, 0}, {5, 5}, {11, 8}};
    LabelField lf = svrf_segment(img, u, 0.0, seeds, 10);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int best = 0;
            for (int l = 1; l < L; ++l)
                if (u.at(x, y, l) > u.at(x, y, best)) best = l;
            CHECK(lf.at(x, y) == best);
        }
}

TEST_CASE("uniform unary with strong smoothing keeps a single-label field", "[svrf]") {
    const int w = 8, h = 8;
    UnaryScores u(w, h, 2); // all-zero scores: uniform
    Raster img(w, h, 0.5);
    std::vector<int> labels(static_cast<std::size_t>(w) * h, 1);
    IcmResult res = icm_refine(labels, u, img, 5.0, 10);
    for (int l : labels) CHECK(l == 1);
    CHECK(res.converged);
}

TEST_CASE("ICM energy equals the exhaustive minimum on 4x4 two-label instances", "[svrf]") {
    // Archived-seed batch: all thirty (instance, beta) runs reach the global
    // minimum found by enumerating the 65536 labelings.
    Rng rng(311);
    int optimal = 0;
    const int trials = 10;
    for (int trial = 0; trial < trials; ++trial) {
        for (double beta : {0.0, 0.5, 1.0}) {
            UnaryScores u = random_unary(4, 4, 2, rng, 1.5);
            Raster img = random_image(4, 4, rng);
            ClusterSeeds seeds;
            seeds.positions = {{0, 0}, {3, 3}};
            LabelField lf = svrf_segment(img, u, beta, seeds, 30);
            const double icm_e = svrf_energy(lf.labels, u, img, beta);
            const double min_e = exhaustive_min_energy(u, img, beta);
            REQUIRE(icm_e >= min_e - 1e-12);
            if (icm_e <= min_e + 1e-9) ++optimal;
        }
    }
    // Every instance in this seeded batch reaches the global minimum.
    CHECK(optimal == trials * 3);
}

TEST_CASE("ICM energy is non-increasing across sweeps on larger instances", "[svrf]") {
    Rng rng(313);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 32, h = 32;
        UnaryScores u = random_unary(w, h, 2 + trial % 2, rng, 1.0);
        Raster img = random_image(w, h, rng);
        std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
        for (int& l : labels) l = rng.index(u.num_labels);
        IcmResult res = icm_refine(labels, u, img, 0.5 + 0.5 * (trial % 3), 8);
        for (std::size_t i = 1; i < res.energy_history.size(); ++i)
            CHECK(res.energy_history[i] <= res.energy_history[i - 1] + 1e-9);
    }
}

TEST_CASE("cluster parameters derive from mask components", "[svrf]") {
    BinaryMask mask(24, 16);
    for (int y = 2; y < 6; ++y)
        for (int x = 2; x < 6; ++x) mask.set(x, y, true);
    for (int y = 9; y < 14; ++y)
        for (int x = 15; x < 21; ++x) mask.set(x, y, true);
    ClusterSeeds seeds = derive_cluster_params(mask);
    REQUIRE(seeds.count() == 3); // 2 components + background
    // seed 0 is background, far away from both blobs
    CHECK(!mask.at(static_cast<int>(seeds.positions[0].x),
                   static_cast<int>(seeds.positions[0].y)));
    // component seeds are the snapped centroids
    CHECK(seeds.positions[1].x == 3.0);
    CHECK(seeds.positions[1].y == 3.0);
    CHECK(seeds.positions[2].x == 17.0);
    CHECK(seeds.positions[2].y == 11.0);
}

TEST_CASE("deriving seeds is deterministic and snaps to in-component pixels", "[svrf]") {
    // L-shaped component whose centroid falls outside the component.
    BinaryMask mask(16, 16);
    for (int i = 0; i < 10; ++i) {
        mask.set(2, 2 + i, true);
        mask.set(2 + i, 2, true);
    }
    ClusterSeeds a = derive_cluster_params(mask);
    ClusterSeeds b = derive_cluster_params(mask);
    REQUIRE(a.count() == b.count());
    for (int i = 0; i < a.count(); ++i) {
        CHECK(a.positions[i].x == b.positions[i].x);
        CHECK(a.positions[i].y == b.positions[i].y);
    }
    CHECK(mask.at(static_cast<int>(a.positions[1].x), static_cast<int>(a.positions[1].y)));
}

TEST_CASE("class count mismatch is rejected", "[svrf]") {
    Raster img(8, 8, 0.5);
    UnaryScores u(8, 8, 3);
    ClusterSeeds seeds;
    seeds.positions = {{0, 0}, {7, 7}};
    CHECK_THROWS_WITH(svrf_segment(img, u, 0.5, seeds, 5),
                      Catch::Matchers::ContainsSubstring("class count"));
}

TEST_CASE("region growing covers the field deterministically", "[svrf]") {
    Rng rng(317);
    Raster img(20, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) img.at(x, y) = x < 10 ? 0.2 : 0.8;
    ClusterSeeds seeds;
    seeds.positions = {{2, 10}, {17, 10}};
    auto labels = region_grow_labels(img, seeds);
    for (int l : labels) CHECK((l == 0 || l == 1));
    // the dark half belongs to seed 0, the bright half to seed 1
    CHECK(labels[10 * 20 + 1] == 0);
    CHECK(labels[10 * 20 + 18] == 1);
    CHECK(region_grow_labels(img, seeds) == labels);
}

TEST_CASE("kernel unary model separates the two-region image", "[svrf]") {
    // Train on seed neighborhoods of a noisy two-intensity scene and verify
    // the scores prefer the right class on held-out pixels.
    Rng rng(331);
    const int w = 24, h = 16;
    Raster img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = (x < 12 ? 0.25 : 0.75) + rng.gaussian(0.0, 0.02);
    EdgeMap edges = canny(img, 1.0, 0.05, 0.2);
    auto feats = site_features(img, edges);

    BinaryMask half(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 12; x < w; ++x) half.set(x, y, true);
    ComponentSet comps = connected_components(half);

    std::vector<FeatureVec> train_f;
    std::vector<int> train_c, train_l;
    for (int y = 0; y < h; y += 2)
        for (int x : {2, 4, 6, 17, 19, 21}) {
            train_f.push_back(feats[static_cast<std::size_t>(y) * w + x]);
            train_c.push_back(comps.id_at(x, y));
            train_l.push_back(x < 12 ? 0 : 1);
        }
    MixtureEnsemble ens = fit_mixture_ensemble(train_f, 2, 3, 61);
    KernelUnaryModel model =
        train_kernel_unary(train_f, train_c, train_l, 2, ens, 0.7, 400, 67);
    UnaryScores u = unary_from_model(model, feats, comps.ids, w, h);

    int correct = 0, total = 0;
    for (int y = 1; y < h; y += 3)
        for (int x : {1, 8, 14, 22}) {
            const int want = x < 12 ? 0 : 1;
            const int got = u.at(x, y, 0) > u.at(x, y, 1) ? 0 : 1;
            correct += got == want;
            ++total;
        }
    CHECK(correct >= total - 1);
}
