#include <doctest.h>

#include "fixtures.hpp"
#include "holopatch/cartan.hpp"

using namespace holopatch;

namespace {

AffineBlockMatrix shear2(cplx b) {
    auto m = AffineBlockMatrix::identity(2);
    m.b[0] = b;
    return m;
}

double product_residual(const GroupMapSample& gamma, const CartanSplit& s) {
    double worst = 0.0;
    for (std::size_t i = 0; i < gamma.domain->size(); ++i) {
        cplx z = gamma.domain->pos(i);
        int i1 = s.gamma1.domain->find_sample(z);
        int i2 = s.gamma2.domain->find_sample(z);
        auto prod = block::mul(s.gamma2.matrices[i2], s.gamma1.matrices[i1]);
        double d = 0.0;
        for (std::size_t t = 0; t < prod.a.size(); ++t) d += std::norm(prod.a[t] - gamma.matrices[i].a[t]);
        for (std::size_t t = 0; t < prod.b.size(); ++t) d += std::norm(prod.b[t] - gamma.matrices[i].b[t]);
        worst = std::max(worst, std::sqrt(d));
    }
    return worst;
}

}  // namespace

TEST_CASE("block matrix algebra: product, inverse, exp/log round trip") {
    AffineBlockMatrix m = AffineBlockMatrix::identity(3);
    m.A(0, 0) = {1.2, 0.1};
    m.A(0, 1) = {0.3, -0.2};
    m.A(1, 0) = {-0.1, 0.05};
    m.A(1, 1) = {0.9, 0.0};
    m.b[0] = {0.2, 0.3};
    m.b[1] = {-0.4, 0.0};
    auto inv = block::inverse(m);
    auto prod = block::mul(m, inv);
    CHECK(prod.frobenius_distance_to_identity() < 1e-12);
    CHECK(block::condition(m) < 1e6);

    auto lg = block::log(m);
    auto back = block::exp(lg);
    double d = 0.0;
    for (std::size_t t = 0; t < m.a.size(); ++t) d = std::max(d, std::abs(back.a[t] - m.a[t]));
    for (std::size_t t = 0; t < m.b.size(); ++t) d = std::max(d, std::abs(back.b[t] - m.b[t]));
    CHECK(d < 1e-12);

    // The last row is structural: apply preserves the final coordinate.
    auto v = m.apply({{1, 1}, {2, -1}, {0.5, 0.25}});
    CHECK(v[2] == cplx{0.5, 0.25});
}

TEST_CASE("gamma == I splits into identity factors") {
    DiskPair pair(0.04);
    auto gamma = GroupMapSample::constant(pair.ctx->k12, AffineBlockMatrix::identity(2));
    auto s = split_multiplicative(gamma, pair.ctx);
    CHECK(s.iterations == 0);
    for (const auto& m : s.gamma1.matrices) CHECK(m.frobenius_distance_to_identity() == 0.0);
    for (const auto& m : s.gamma2.matrices) CHECK(m.frobenius_distance_to_identity() == 0.0);
}

TEST_CASE("constant unipotent gamma splits with tiny product residual") {
    DiskPair pair(0.04);
    auto gamma = GroupMapSample::constant(pair.ctx->k12, shear2({0.2, 0.0}));
    auto s = split_multiplicative(gamma, pair.ctx);
    CHECK(product_residual(gamma, s) <= 1e-10);
    for (const auto& m : s.gamma1.matrices) {
        CHECK(m.A(0, 0) != cplx{0, 0});
    }
}

TEST_CASE("gamma(z) = [[1, 0.3z],[0,1]] on the lens: residual, iterations, plateaus") {
    double h = 0.02;
    DiskPair pair(h);
    auto gamma = GroupMapSample::from_function(pair.ctx->k12,
                                               [](cplx z) { return shear2(0.3 * z); });
    auto s = split_multiplicative(gamma, pair.ctx);
    CHECK(s.iterations <= 20);
    CHECK(product_residual(gamma, s) <= 1e-8);

    // Factors holomorphic on the chi plateaus (cr O(h) there).
    auto b_of = [&](const GroupMapSample& g) {
        SampledMap m(g.domain, 1);
        for (std::size_t i = 0; i < g.domain->size(); ++i) m.at(i, 0) = g.matrices[i].b[0];
        return m;
    };
    auto m1 = b_of(s.gamma1);
    std::vector<bool> mask1(pair.k1->size(), false);
    for (std::size_t i = 0; i < pair.k1->size(); ++i)
        mask1[i] = std::abs(pair.ctx->dbar_chi_at(pair.k1->pos(i))) == 0.0;
    auto r1 = cr_residual(m1, mask1);
    CHECK(r1.max <= 10 * h * (1 + sup_norm(m1)));

    // Residual contraction by factor <= 0.9 per logged iteration.
    for (std::size_t i = 1; i < s.residual_log.size(); ++i)
        if (s.residual_log[i - 1] > 1e-13)
            CHECK(s.residual_log[i] <= 0.9 * s.residual_log[i - 1] + 1e-14);
}

TEST_CASE("group closure: output blocks invertible with bounded condition") {
    DiskPair pair(0.04);
    auto gamma = GroupMapSample::from_function(pair.ctx->k12, [](cplx z) {
        auto m = AffineBlockMatrix::identity(2);
        m.A(0, 0) = 1.0 + 0.2 * z;
        m.b[0] = 0.1 * z * z;
        return m;
    });
    auto s = split_multiplicative(gamma, pair.ctx);
    for (const auto& m : s.gamma1.matrices) CHECK(block::condition(m) <= 1e6);
    for (const auto& m : s.gamma2.matrices) CHECK(block::condition(m) <= 1e6);
    CHECK(product_residual(gamma, s) <= 1e-7);
}

TEST_CASE("near-identity exp data: one iteration reaches the quadratic regime") {
    RectPair pair(0.025);
    auto gamma = GroupMapSample::from_function(pair.ctx->k12, [](cplx z) {
        AffineBlockAlgebra x = AffineBlockAlgebra::zero(2);
        x.L(0, 0) = 0.02 * z;
        x.c[0] = {0.04, 0.0};
        return block::exp(x);
    });
    double eta_norm = 0.0;
    for (std::size_t i = 0; i < gamma.domain->size(); ++i) {
        cplx z = gamma.domain->pos(i);
        eta_norm = std::max(eta_norm, std::sqrt(std::norm(0.02 * z) + std::norm(cplx{0.04, 0})));
    }
    REQUIRE(eta_norm <= 0.051);
    AdditiveSplitter sp(pair.ctx, {});
    auto id1 = GroupMapSample::constant(pair.k1, AffineBlockMatrix::identity(2));
    auto id2 = GroupMapSample::constant(pair.k2, AffineBlockMatrix::identity(2));
    auto s = split_multiplicative_from(gamma, sp, id1, id2, CartanOptions{});
    REQUIRE(s.residual_log.size() >= 2);
    CHECK(s.residual_log[1] <= 10.0 * eta_norm * eta_norm);
}

TEST_CASE("far-from-identity constant requires continuation") {
    DiskPair pair(0.04);
    auto big = shear2({1.5, 0.0});  // distance 1.5 from I
    auto gamma = GroupMapSample::constant(pair.ctx->k12, big);
    CHECK_THROWS(split_multiplicative(gamma, pair.ctx, CartanOptions{}, nullptr));
    auto s = split_multiplicative(gamma, pair.ctx, CartanOptions{},
                                  [&](cplx) { return big; });
    CHECK(product_residual(gamma, s) <= 1e-7);
}
