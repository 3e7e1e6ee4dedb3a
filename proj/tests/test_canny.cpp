#include <catch_amalgamated.hpp>

#include "shapereg/canny.hpp"
#include "shapereg/convolve.hpp"
#include "shapereg/raster.hpp"
#include "shapereg/rng.hpp"

using namespace shapereg;

namespace {

Raster vertical_step(int w, int h, int c) {
    Raster img(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = c; x < w; ++x) img.at(x, y) = 1.0;
    return img;
}

} // namespace

TEST_CASE("constant image yields empty edge mask", "[canny]") {
    Raster img(32, 32, 0.42);
    EdgeMap em = canny(img, 1.4, 0.05, 0.15);
    for (auto m : em.mask) CHECK(m == 0);
    for (double g : em.gradient_mag) CHECK(g == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("vertical step edge localizes to the step columns", "[canny]") {
    const int c = 31;
    Raster img = vertical_step(64, 64, c);
    EdgeMap em = canny(img, 1.0, 0.05, 0.3);

    // Independent oracle: exhaustive Sobel gradient of the blurred image. The
    // maximum response straddles the step, so surviving edge pixels must sit
    // within {c-1, c}.
    Gradients g = sobel(gaussian_blur(img, 1.0));
    int edge_count = 0;
    for (int y = 0; y < em.height; ++y)
        for (int x = 0; x < em.width; ++x)
            if (em.edge(x, y)) {
                ++edge_count;
                CHECK((x == c - 1 || x == c));
                CHECK(std::abs(g.gx.at(x, y)) >= std::abs(g.gx.at(reflect101(x - 2, 64), y)));
            }
    CHECK(edge_count >= 60); // the step spans the full height
}

TEST_CASE("no canny output pixel is ever isolated", "[canny]") {
    // Hysteresis trace on the 3x3 neighborhood: a strong pixel whose
    // neighbors all fall below low cannot recruit support, so it must not
    // survive. Checked as an invariant over noise fields and thresholds.
    Rng rng(101);
    for (int trial = 0; trial < 6; ++trial) {
        Raster img(40, 40);
        for (double& v : img.data) v = rng.uniform();
        const double low = 0.05 + 0.3 * rng.uniform();
        const double high = low + 0.05 + 0.5 * rng.uniform();
        EdgeMap em = canny(img, 1.0, low, high);
        for (int y = 0; y < em.height; ++y)
            for (int x = 0; x < em.width; ++x) {
                if (!em.edge(x, y)) continue;
                int neighbors = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int qx = x + dx, qy = y + dy;
                        if (qx >= 0 && qx < em.width && qy >= 0 && qy < em.height &&
                            em.edge(qx, qy))
                            ++neighbors;
                    }
                CHECK(neighbors >= 1);
            }
    }
}

TEST_CASE("blurred impulse edges stay confined to the immediate ring", "[canny]") {
    Raster img(21, 21, 0.0);
    img.at(10, 10) = 1.0;
    EdgeMap em = canny(img, 1.0, 0.05, 0.2);
    for (int y = 0; y < 21; ++y)
        for (int x = 0; x < 21; ++x)
            if (em.edge(x, y)) {
                CHECK(std::abs(x - 10) <= 1);
                CHECK(std::abs(y - 10) <= 1);
            }
}

TEST_CASE("edge pixels carry gradient magnitude >= low threshold", "[canny]") {
    Raster img = vertical_step(48, 40, 17);
    const double low = 0.07, high = 0.2;
    EdgeMap em = canny(img, 1.2, low, high);
    for (int y = 0; y < em.height; ++y)
        for (int x = 0; x < em.width; ++x)
            if (em.edge(x, y)) CHECK(em.mag(x, y) >= low);
}

TEST_CASE("mask is thin: no 3-in-a-row along the gradient direction", "[canny]") {
    Raster img = vertical_step(64, 64, 20);
    EdgeMap em = canny(img, 1.0, 0.05, 0.3);
    // Horizontal gradient here, so runs along x must never reach 3.
    for (int y = 0; y < em.height; ++y) {
        int run = 0;
        for (int x = 0; x < em.width; ++x) {
            run = em.edge(x, y) ? run + 1 : 0;
            CHECK(run < 3);
        }
    }
}

TEST_CASE("parameter validation", "[canny]") {
    Raster img(16, 16, 0.0);
    CHECK_THROWS_AS(canny(img, 0.0, 0.1, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(canny(img, 1.0, 0.3, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(canny(img, 1.0, 0.0, 0.2), std::invalid_argument);
    Raster tiny(3, 3, 0.0);
    CHECK_THROWS_WITH(canny(tiny, 2.0, 0.1, 0.2),
                      Catch::Matchers::ContainsSubstring("smaller than the Gaussian kernel"));
}

TEST_CASE("chamfer distance to edges is zero on edges and grows off them", "[canny]") {
    Raster img = vertical_step(32, 32, 16);
    EdgeMap em = canny(img, 1.0, 0.05, 0.3);
    Raster d = distance_to_edges(em);
    for (int y = 0; y < em.height; ++y)
        for (int x = 0; x < em.width; ++x)
            if (em.edge(x, y)) CHECK(d.at(x, y) == 0.0);
    CHECK(d.at(0, 16) > 5.0);
}
