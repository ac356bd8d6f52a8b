#include <doctest.h>

#include "fixtures.hpp"
#include "holopatch/sampled_map.hpp"

using namespace holopatch;

TEST_CASE("sup_norm basics") {
    auto k = disk_compact({0, 0}, 1.0, 0.05);
    auto zero = SampledMap(k, 1);
    CHECK(sup_norm(zero) == 0.0);

    auto f = SampledMap::from_function(k, [](cplx z) { return z; });
    CHECK(sup_norm(f) == doctest::Approx(1.0).epsilon(0.06));

    SampledMap pair(k, 2);
    for (std::size_t i = 0; i < pair.size(); ++i) {
        pair.at(i, 0) = {3, 0};
        pair.at(i, 1) = {0, 4};
    }
    CHECK(sup_norm(pair) == 4.0);

    SampledMap empty;
    CHECK_THROWS(sup_norm(empty));
}

TEST_CASE("cr_residual: conj(z) sits at 1, constants at 0, z^3 at O(h^2)") {
    auto k = disk_compact({0, 0}, 1.0, 0.05);
    auto fbar = SampledMap::from_function(k, [](cplx z) { return std::conj(z); });
    auto r = cr_residual(fbar);
    CHECK_FALSE(r.vacuous);
    for (std::size_t i = 0; i < k->size(); ++i)
        if (r.per_sample[i] >= 0) CHECK(r.per_sample[i] == doctest::Approx(1.0).epsilon(1e-9));

    auto c = SampledMap::from_function(k, [](cplx) { return cplx{2.5, -1}; });
    CHECK(cr_residual(c).max <= 1e-13);

    double maxes[2];
    double hs[2] = {0.05, 0.025};
    for (int t = 0; t < 2; ++t) {
        auto kt = disk_compact({0, 0}, 1.0, hs[t]);
        auto f = SampledMap::from_function(kt, [](cplx z) { return z * z * z; });
        maxes[t] = cr_residual(f).max;
        // Centered differences of z^3 leave exactly h^2 * f'''/6 = h^2.
        CHECK(maxes[t] == doctest::Approx(hs[t] * hs[t]).epsilon(1e-6));
    }
    CHECK(std::log2(maxes[0] / maxes[1]) >= 1.9);
}

TEST_CASE("cr_residual on an arc is vacuous") {
    auto seg = build_compact({make_polyline({{0.0, 0.0}, {1.0, 0.0}})}, 0.01);
    auto k = std::make_shared<DiscretizedCompact>(seg);
    auto f = SampledMap::from_function(k, [](cplx z) { return std::conj(z); });
    auto r = cr_residual(f);
    CHECK(r.vacuous);
    CHECK(r.max == 0.0);
    CHECK(r.eligible == 0);
}

TEST_CASE("non-holomorphic polynomial in conj(z) stays bounded below under refinement") {
    for (double h : {0.05, 0.025}) {
        auto k = disk_compact({0, 0}, 1.0, h);
        auto f = SampledMap::from_function(
            k, [](cplx z) { return std::conj(z) * std::conj(z) + 0.5 * std::conj(z); });
        // dbar(zbar^2 + zbar/2) = 2 zbar + 1/2, which is >= 0.5 somewhere.
        CHECK(cr_residual(f).max >= 0.4);
    }
}
