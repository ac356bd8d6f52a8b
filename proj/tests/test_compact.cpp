#include <doctest.h>

#include "fixtures.hpp"

using namespace holopatch;

TEST_CASE("unit disk discretization: count and quadrature weight") {
    auto k = disk_compact({0, 0}, 1.0, 0.05);
    // ~ pi / h^2 lattice samples
    CHECK(k->size() > 1100);
    CHECK(k->size() < 1450);
    CHECK(k->total_weight() == doctest::Approx(kPi).epsilon(0.02));
    CHECK(k->component_count() == 1);

    // Covering invariants: random set points are near samples and vice versa.
    SpatialHash hash(*k);
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        cplx z = rng.unit_disk();
        CHECK(hash.nearest_distance(z) <= k->h + 1e-12);
    }
    for (std::size_t i = 0; i < k->size(); i += 37)
        CHECK(std::abs(k->pos(i)) <= 1.0 + k->h);
}

TEST_CASE("quadrature weight converges at rate O(h)") {
    double hs[3] = {0.1, 0.05, 0.025};
    double errs[3];
    for (int i = 0; i < 3; ++i)
        errs[i] = std::abs(disk_compact({0.3, -0.2}, 0.8, hs[i])->total_weight() - kPi * 0.64);
    double slope = std::log2(errs[0] / errs[2]) / 2.0;
    CHECK(slope >= 0.8);
}

TEST_CASE("segment [0,1] at h=0.01: 101 samples, no interior, zero weight") {
    auto k = build_compact({make_polyline({{0.0, 0.0}, {1.0, 0.0}})}, 0.01);
    CHECK(k.size() == 101);
    for (const auto& s : k.samples) {
        CHECK(s.weight == 0.0);
        CHECK_FALSE(s.is_interior);
    }
    CHECK(k.component_count() == 1);
}

TEST_CASE("empty primitive list gives the empty compact") {
    auto k = build_compact({}, 0.1);
    CHECK(k.empty());
    CHECK(k.component_count() == 0);
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS(build_compact({}, 0.0));
    CHECK_THROWS(make_disk({0, 0}, 0.0));
    CHECK_THROWS(make_polyline({{0, 0}, {1, 0}, {0.5, 0.5}, {0.5, -0.5}}));  // self-crossing
}

TEST_CASE("annulus: winding membership carves the hole") {
    auto k = annulus_compact(0.5, 1.0, 0.05);
    double area = kPi * (1.0 - 0.25);
    CHECK(k->total_weight() == doctest::Approx(area).epsilon(0.03));
    CHECK_FALSE(k->has_sample({0.0, 0.0}));
    CHECK(k->has_sample({0.75, 0.0}));
    CHECK(k->component_count() == 1);
}

TEST_CASE("two far disks have two components; union/intersection behave") {
    auto a = disk_compact({0, 0}, 0.5, 0.05);
    auto b = disk_compact({2.0, 0.0}, 0.5, 0.05);
    auto u = union_compact(*a, *b);
    CHECK(u.component_count() == 2);
    CHECK(intersect_compact(*a, *b).empty());

    auto c = disk_compact({0.25, 0.0}, 0.5, 0.05);
    auto i = intersect_compact(*a, *c);
    CHECK(i.size() > 0);
    for (const auto& s : i.samples) {
        CHECK(std::abs(s.pos - cplx{0, 0}) <= 0.5 + 0.05);
        CHECK(std::abs(s.pos - cplx{0.25, 0}) <= 0.5 + 0.05);
    }
}

TEST_CASE("inflate_compact surrounds the seed set") {
    auto k = build_compact({make_polyline({{0.0, 0.0}, {1.0, 0.0}})}, 0.02);
    auto fat = inflate_compact(k, 0.08);
    CHECK(fat.size() > 4 * k.size());
    bool any_interior = false;
    for (const auto& s : fat.samples) any_interior = any_interior || s.is_interior;
    CHECK(any_interior);
}
