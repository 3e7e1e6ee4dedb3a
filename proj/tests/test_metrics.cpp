#include <catch_amalgamated.hpp>

#include "shapereg/metrics.hpp"
#include "shapereg/rng.hpp"

using namespace shapereg;

namespace {

Raster noise(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    Raster img(w, h);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

} // namespace

TEST_CASE("nccc of an image with itself is 1", "[metrics]") {
    Raster a = noise(16, 16, 1);
    auto r = nccc(a, a);
    CHECK(r.raw == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.paper == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("nccc is invariant to positive affine intensity maps", "[metrics]") {
    Raster a = noise(16, 16, 2);
    Raster b = a;
    for (double& v : b.data) v = 2.0 * v + 0.1;
    auto r = nccc(a, b);
    CHECK(r.raw == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("photometric negative gives raw -1 and paper-convention 0", "[metrics]") {
    Raster a = noise(16, 16, 3);
    Raster b = a;
    for (double& v : b.data) v = 1.0 - v;
    auto r = nccc(a, b);
    CHECK(r.raw == Catch::Approx(-1.0).margin(1e-12));
    CHECK(r.paper == 0.0);
}

TEST_CASE("nccc rejects constant images", "[metrics]") {
    Raster a = noise(8, 8, 4);
    Raster c(8, 8, 0.5);
    CHECK_THROWS_AS(nccc(a, c), std::domain_error);
    CHECK_THROWS_AS(nccc(c, a), std::domain_error);
    CHECK_THROWS_AS(nccc(a, Raster(4, 4, 0.0)), std::invalid_argument);
}

TEST_CASE("rmse basics", "[metrics]") {
    std::vector<Point> p = {{1, 2}, {3, 4}};
    CHECK(rmse(p, p) == 0.0);
    CHECK(rmse({{0, 0}}, {{3, 4}}) == Catch::Approx(5.0));
    CHECK_THROWS_AS(rmse(p, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(rmse({}, {}), std::invalid_argument);
}

TEST_CASE("rmse matches hand-summed value on 10 pairs", "[metrics]") {
    // Offsets (k, 2k) for k = 0..9: sum of squared displacements is
    // sum(k^2 + 4k^2) = 5 * sum(k^2) = 5 * 285 = 1425; rmse = sqrt(142.5).
    std::vector<Point> pred, truth;
    for (int k = 0; k < 10; ++k) {
        truth.push_back({10.0 * k, 5.0 * k});
        pred.push_back({10.0 * k + k, 5.0 * k + 2.0 * k});
    }
    CHECK(rmse(pred, truth) == Catch::Approx(std::sqrt(142.5)).epsilon(1e-12));
}

TEST_CASE("time categories follow the published thresholds", "[metrics]") {
    CHECK(time_category(5) == TimeCategory::Low);
    CHECK(time_category(45) == TimeCategory::Medium);
    CHECK(time_category(120) == TimeCategory::High);
    CHECK(time_category(29.999) == TimeCategory::Low);
    CHECK(time_category(30.0) == TimeCategory::Medium);
    CHECK(time_category(60.0) == TimeCategory::Medium);
    CHECK(time_category(60.001) == TimeCategory::High);
    CHECK_THROWS_AS(time_category(-1), std::invalid_argument);
}
