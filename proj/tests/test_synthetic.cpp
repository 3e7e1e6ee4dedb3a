#include <catch_amalgamated.hpp>

#include <numbers>

#include "oracles.hpp"
#include "shapereg/synthetic.hpp"

using namespace shapereg;

TEST_CASE("identity warp with zero noise reproduces the master exactly", "[synthetic]") {
    Raster img = oracles::textured_scene(64, 501);
    WarpModel warp;
    warp.cx = 32;
    warp.cy = 32;
    SyntheticPair pair = generate_synthetic_pair(img, warp, 0.0, 7);
    CHECK(pair.slave.data == pair.master.data);
    REQUIRE(!pair.gt_master.empty());
    for (std::size_t i = 0; i < pair.gt_master.size(); ++i) {
        CHECK(pair.gt_slave[i].x == pair.gt_master[i].x);
        CHECK(pair.gt_slave[i].y == pair.gt_master[i].y);
    }
}

TEST_CASE("pure translation shifts ground truth exactly", "[synthetic]") {
    Raster img = oracles::textured_scene(96, 503);
    WarpModel warp;
    warp.tx = 10.0;
    warp.ty = 0.0;
    warp.cx = 48;
    warp.cy = 48;
    SyntheticPair pair = generate_synthetic_pair(img, warp, 0.0, 7);
    REQUIRE(!pair.gt_master.empty());
    for (std::size_t i = 0; i < pair.gt_master.size(); ++i) {
        CHECK(pair.gt_slave[i].x - pair.gt_master[i].x == Catch::Approx(10.0).margin(1e-12));
        CHECK(pair.gt_slave[i].y - pair.gt_master[i].y == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("warp inverse is consistent with the forward map", "[synthetic]") {
    WarpModel warp;
    warp.tx = 6.0;
    warp.ty = -8.0;
    warp.rotation_rad = 7.0 * std::numbers::pi / 180.0;
    warp.scale = 1.04;
    warp.cx = 64;
    warp.cy = 64;
    warp.bumps.push_back({40.0, 80.0, 1.5, -1.0, 20.0});
    warp.bumps.push_back({90.0, 30.0, -1.0, 0.8, 25.0});
    Rng rng(509);
    for (int i = 0; i < 200; ++i) {
        const Point p{rng.uniform(0.0, 128.0), rng.uniform(0.0, 128.0)};
        const Point q = warp.apply(p);
        const Point back = warp.inverse(q);
        REQUIRE(std::hypot(back.x - p.x, back.y - p.y) < 1e-6);
    }
}

TEST_CASE("excessive warps violate the overlap precondition", "[synthetic]") {
    Raster img = oracles::textured_scene(64, 521);
    WarpModel warp;
    warp.tx = 50.0;
    warp.ty = 50.0;
    warp.cx = 32;
    warp.cy = 32;
    CHECK_THROWS_WITH(generate_synthetic_pair(img, warp, 0.0, 7),
                      Catch::Matchers::ContainsSubstring("70%"));
}

TEST_CASE("noise is deterministic per seed and bounded to [0,1]", "[synthetic]") {
    Raster img = oracles::textured_scene(64, 523);
    WarpModel warp;
    warp.tx = 3.0;
    warp.cx = 32;
    warp.cy = 32;
    SyntheticPair a = generate_synthetic_pair(img, warp, 0.02, 99);
    SyntheticPair b = generate_synthetic_pair(img, warp, 0.02, 99);
    CHECK(a.slave.data == b.slave.data);
    for (double v : a.slave.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    SyntheticPair c = generate_synthetic_pair(img, warp, 0.02, 100);
    CHECK(a.slave.data != c.slave.data);
}
