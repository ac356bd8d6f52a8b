#include <doctest.h>

#include "fixtures.hpp"
#include "holopatch/interpolation.hpp"

using namespace holopatch;

namespace {

// Gaussian-elimination solve of a small complex Vandermonde system; the
// independent oracle for interpolation coefficients.
std::vector<cplx> vandermonde_solve(const std::vector<cplx>& nodes, const std::vector<cplx>& rhs) {
    std::size_t n = nodes.size();
    std::vector<std::vector<cplx>> a(n, std::vector<cplx>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        cplx p{1.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = p;
            p *= nodes[i];
        }
        a[i][n] = rhs[i];
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            cplx f = a[r][c] / a[c][c];
            for (std::size_t j = c; j <= n; ++j) a[r][j] -= f * a[c][j];
        }
    }
    std::vector<cplx> x(n);
    for (std::size_t r = n; r-- > 0;) {
        cplx s = a[r][n];
        for (std::size_t j = r + 1; j < n; ++j) s -= a[r][j] * x[j];
        x[r] = s / a[r][r];
    }
    return x;
}

}  // namespace

TEST_CASE("constant data interpolates to a constant") {
    auto L = lagrange_interpolate_scalar({{0, 0}, {1, 0}, {0, 1}}, {{3, 4}, {3, 4}, {3, 4}});
    CHECK(std::abs(L.eval_scalar({0.3, 0.7}) - cplx{3, 4}) < 1e-12);
}

TEST_CASE("two-point data from z^2 gives the line L(z)=z") {
    auto L = lagrange_interpolate_scalar({{0, 0}, {1, 0}}, {{0, 0}, {1, 0}});
    for (cplx z : {cplx{0.5, 0}, cplx{2, 1}, cplx{-3, 0.25}})
        CHECK(std::abs(L.eval_scalar(z) - z) < 1e-12);
}

TEST_CASE("three-node interpolant matches the Vandermonde oracle") {
    std::vector<cplx> nodes = {{0, 0}, {1, 0}, {0, 1}};
    std::vector<cplx> vals = {{1, 0}, {std::exp(1.0), 0}, {std::cos(1.0), std::sin(1.0)}};
    auto L = lagrange_interpolate_scalar(nodes, vals);
    auto coeff = vandermonde_solve(nodes, vals);
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        cplx z = 2.0 * rng.unit_disk();
        cplx direct = coeff[0] + coeff[1] * z + coeff[2] * z * z;
        CHECK(std::abs(L.eval_scalar(z) - direct) < 1e-10);
    }
    // Exactness at the nodes.
    for (std::size_t i = 0; i < nodes.size(); ++i)
        CHECK(std::abs(L.eval_scalar(nodes[i]) - vals[i]) == 0.0);
}

TEST_CASE("duplicate nodes and oversized sets are rejected; empty set is the zero polynomial") {
    CHECK_THROWS(lagrange_interpolate_scalar({{0, 0}, {0, 0}}, {{1, 0}, {2, 0}}));
    std::vector<cplx> many;
    for (int i = 0; i < 13; ++i) many.push_back({double(i), 0.0});
    CHECK_THROWS(InterpolationSet(many, 0.01));
    auto Z = lagrange_interpolate({}, {});
    CHECK(Z.zero());
    CHECK(std::abs(Z.eval_scalar({1, 2})) == 0.0);
}

TEST_CASE("L_P is linear") {
    auto k = rect_compact({-1, -0.1}, {1, 0.1}, 0.05);
    std::vector<cplx> pts = {{-1, 0}, {0, 0}, {1, 0}};
    // Snap to samples.
    Rng rng(3);
    auto f = SampledMap::from_function(k, [](cplx z) { return z * z - cplx{0, 1} * z; });
    auto g = SampledMap::from_function(k, [](cplx z) { return std::exp(z.real()) + cplx{0, 0.3}; });
    cplx a{0.7, -0.2}, b{-1.3, 0.45};
    auto lhs = lagrange_apply(a * f + b * g, pts);
    auto rhs1 = lagrange_apply(f, pts);
    auto rhs2 = lagrange_apply(g, pts);
    double scale = sup_norm(f) + sup_norm(g);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        CHECK(std::abs(lhs.at(i, 0) - (a * rhs1.at(i, 0) + b * rhs2.at(i, 0))) <= 1e-12 * scale);
}

TEST_CASE("operator bound: |L_P g| <= C_P |g| for 100 random g") {
    auto k = rect_compact({-1, -0.1}, {1, 0.1}, 0.05);
    std::vector<cplx> pts = {{-1, 0}, {-0.35, 0}, {0.3, 0}, {1, 0}};
    double cp = lebesgue_constant(*k, pts);
    CHECK(cp >= 1.0);
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        cplx c0 = rng.unit_disk(), c1 = rng.unit_disk(), c2 = rng.unit_disk(), c3 = rng.unit_disk();
        auto g = SampledMap::from_function(
            k, [&](cplx z) { return c0 + c1 * z + c2 * z * z + c3 * std::sin(z.real()); });
        CHECK(sup_norm(lagrange_apply(g, pts)) <= cp * sup_norm(g) * (1 + 1e-12));
    }
}

TEST_CASE("interpolation_correction: identity, empty P, and error bound") {
    auto seg = build_compact({make_polyline({{-1.0, 0.0}, {1.0, 0.0}})}, 0.01);
    auto k = std::make_shared<DiscretizedCompact>(seg);
    auto f = SampledMap::from_function(k, [](cplx z) { return std::abs(z.real()); });

    SUBCASE("f_tilde == f returns f") {
        auto r = interpolation_correction(f, f, InterpolationSet({{0, 0}}, 0.01));
        for (std::size_t i = 0; i < r.size(); ++i)
            CHECK(std::abs(r.at(i, 0) - f.at(i, 0)) <= 1e-12);
    }
    SUBCASE("empty P returns f_tilde") {
        auto ft = SampledMap::from_function(k, [](cplx z) { return z; });
        auto r = interpolation_correction(f, ft, InterpolationSet({}, 0.01));
        for (std::size_t i = 0; i < r.size(); ++i)
            CHECK(std::abs(r.at(i, 0) - ft.at(i, 0)) == 0.0);
    }
    SUBCASE("constant offset, P={0}: exact at 0, sup bound with computed C_P") {
        auto ft = f;
        for (std::size_t i = 0; i < ft.size(); ++i) ft.at(i, 0) += 0.01;
        InterpolationSet P({{0, 0}}, 0.01);
        auto r = interpolation_correction(f, ft, P);
        CHECK(std::abs(r.value_at({0, 0})[0] - f.value_at({0, 0})[0]) <= 1e-12);
        double cp = lebesgue_constant(*k, P.restrict_to(*k));
        double err = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i)
            err = std::max(err, std::abs(r.at(i, 0) - f.at(i, 0)));
        CHECK(err <= 0.01 * (1 + cp) + 1e-12);
    }
}

TEST_CASE("project_vanishing: vanishes at P, idempotent, matches z^2-1") {
    auto seg = build_compact({make_polyline({{-2.0, 0.0}, {2.0, 0.0}})}, 0.01);
    auto k = std::make_shared<DiscretizedCompact>(seg);
    InterpolationSet P({{1, 0}, {-1, 0}}, 0.01);

    auto f = SampledMap::from_function(k, [](cplx z) { return z * z; });
    auto r = project_vanishing(f, P);
    CHECK(std::abs(r.value_at({1, 0})[0]) <= 1e-12);
    CHECK(std::abs(r.value_at({-1, 0})[0]) <= 1e-12);
    for (std::size_t i = 0; i < r.size(); ++i) {
        cplx z = k->pos(i);
        CHECK(std::abs(r.at(i, 0) - (z * z - 1.0)) <= 1e-10);
    }
    // Idempotent.
    auto rr = project_vanishing(r, P);
    for (std::size_t i = 0; i < r.size(); ++i)
        CHECK(std::abs(rr.at(i, 0) - r.at(i, 0)) <= 1e-10 * 4.0);

    // Already-vanishing map is unchanged.
    auto g = SampledMap::from_function(k, [](cplx z) { return (z - 1.0) * (z + 1.0) * z; });
    auto pg = project_vanishing(g, P);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(std::abs(pg.at(i, 0) - g.at(i, 0)) <= 1e-9 * sup_norm(g));
}
