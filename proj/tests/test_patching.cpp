#include <doctest.h>

#include "fixtures.hpp"
#include "holopatch/patching.hpp"

using namespace holopatch;

namespace {

SectionChart affine_section(std::shared_ptr<const hp::DiscretizedCompact> k, cplx a, cplx b) {
    return SectionChart::from_function(k, 2, [a, b](cplx z) {
        return std::vector<cplx>{a + b * z};
    });
}

double chartwise_mismatch(const SectionChart& ua, const SectionChart& ub,
                          const TransitionMap& f, const DiscretizedCompact& k12) {
    double worst = 0.0;
    for (std::size_t i = 0; i < k12.size(); ++i) {
        cplx z = k12.pos(i);
        int ia = ua.domain().find_sample(z);
        int ib = ub.domain().find_sample(z);
        auto w = f(ua.point(std::size_t(ia)));
        for (int r = 0; r < ua.n(); ++r)
            worst = std::max(worst, std::abs(ub.values.at(std::size_t(ib), r) - w[r]));
    }
    return worst;
}

}  // namespace

TEST_CASE("transition builtins validate and invert") {
    Rng rng(77);
    for (auto& pair : {make_identity_pair(), make_affine_pair({2, 0.3}, {0.1, 0}, {0, -0.2}),
                       make_shear_square_pair({0.1, 0}),
                       make_linear_scale_pair({{0.0, 0.0}, {1.0, 0.0}}, {{0.0, 0.0}})}) {
        // linear_scale with a(z2) = z2 is only valid away from z2 = 0.
        bool away_from_zero = pair.forward.name == "linear_scale";
        Rng local(91);
        for (int t = 0; t < 12; ++t) {
            std::vector<cplx> z = {local.unit_disk(),
                                   local.unit_disk() + (away_from_zero ? cplx{3.0, 0.0} : cplx{0.0, 0.0})};
            auto w = pair.forward(z);
            auto back = pair.inverse(w);
            CHECK(std::abs(back[0] - z[0]) < 1e-10);
            CHECK(std::abs(back[1] - z[1]) < 1e-12);
        }
        if (!away_from_zero) pair.forward.validate(rng);
    }
}

TEST_CASE("S is a right inverse of the frozen derivative (identity transition)") {
    DiskPair pair(0.04);
    auto f = identity_transition(2);
    auto u1 = affine_section(pair.k1, {0.3, 0.0}, {0.2, 0.0});
    RhsInverse S = build_rhs_inverse(u1, f, pair.ctx, {});
    Rng rng(5);
    auto rep = S.probe(rng, 20, 20, 1e-6);
    CHECK(rep.right_inverse_defect <= 1e-6);
    CHECK(rep.norm_estimate > 0.0);

    // S(0) = 0.
    SampledMap zero(pair.ctx->k12, 1);
    auto v = S.apply(zero);
    CHECK(patch_norm(v) == 0.0);
}

TEST_CASE("S right inverse for a constant diagonal-stretch transition") {
    DiskPair pair(0.04);
    auto f = affine_transition({2.0, 0.0}, {0.0, 0.0}, {0.0, 0.0});  // (2 z1, z2)
    auto u1 = affine_section(pair.k1, {0.1, 0.0}, {0.0, 0.0});
    RhsInverse S = build_rhs_inverse(u1, f, pair.ctx, {});
    Rng rng(6);
    CHECK_NOTHROW(S.probe(rng, 20, 20, 1e-6));
}

TEST_CASE("patch_sections: identity transition and matching charts gives v = 0") {
    DiskPair pair(0.04);
    auto f = identity_transition(2);
    auto u1 = affine_section(pair.k1, {0.25, 0.1}, {0.15, 0.0});
    auto u2 = affine_section(pair.k2, {0.25, 0.1}, {0.15, 0.0});
    auto res = patch_sections(u1, u2, f, pair.ctx, {}, 0.5);
    CHECK(res.glue_residual <= 1e-12);
    CHECK(sup_norm(res.v1.values) <= 1e-12);
    CHECK(sup_norm(res.v2.values) <= 1e-12);
}

TEST_CASE("affine transition with constant offset solves in one step") {
    DiskPair pair(0.04);
    auto f = affine_transition({1.0, 0.0}, {0.05, 0.0}, {0.0, 0.0});  // (z1 + 0.05, z2)
    auto u1 = affine_section(pair.k1, {0.3, 0.0}, {0.2, 0.0});
    // u2 = F(u1) - 0.02 on the overlap.
    auto u2 = SectionChart::from_function(pair.k2, 2, [&](cplx z) {
        return std::vector<cplx>{(cplx{0.3, 0.0} + cplx{0.2, 0.0} * z) + 0.05 - 0.02};
    });
    auto res = patch_sections(u1, u2, f, pair.ctx, {}, 0.5);
    CHECK(res.glue_residual <= 1e-8);
    CHECK(res.newton_iterations <= 2);
    double vmax = std::max(sup_norm(res.v1.values), sup_norm(res.v2.values));
    CHECK(vmax <= 0.05);
    CHECK(vmax >= 0.005);  // the mismatch is genuinely absorbed

    // Direct check of the glued identity.
    SectionChart g1 = u1;
    for (std::size_t i = 0; i < g1.values.size(); ++i) g1.values.at(i, 0) += res.v1.values.at(i, 0);
    SectionChart g2 = u2;
    for (std::size_t i = 0; i < g2.values.size(); ++i) g2.values.at(i, 0) += res.v2.values.at(i, 0);
    CHECK(chartwise_mismatch(g1, g2, f, *pair.ctx->k12) <= 1e-8);
}

TEST_CASE("shear transition, perturbation 1e-3, P = {0}: residual, vanishing, halving") {
    double h = 0.02;
    DiskPair pair(h);
    auto f = shear_square_transition({0.1, 0.0});
    auto u1 = affine_section(pair.k1, {0.3, 0.0}, {0.2, 0.0});
    std::vector<cplx> P = {{0.0, 0.0}};

    auto perturbed = [&](double amp) {
        return SectionChart::from_function(pair.k2, 2, [&, amp](cplx z) {
            cplx t1 = cplx{0.3, 0.0} + cplx{0.2, 0.0} * z;
            cplx val = t1 + cplx{0.1, 0.0} * z * z + amp * (z / 1.6);  // vanishes at 0
            return std::vector<cplx>{val};
        });
    };

    auto r1 = patch_sections(u1, perturbed(1e-3), f, pair.ctx, P, 0.5);
    CHECK(r1.glue_residual <= 1e-8);
    CHECK(std::abs(r1.v1.values.value_at({0, 0})[0]) <= 1e-10);
    CHECK(std::abs(r1.v2.values.value_at({0, 0})[0]) <= 1e-10);
    // Last coordinates of the corrections are exactly 0.
    for (std::size_t i = 0; i < r1.v1.values.size(); ++i)
        CHECK(r1.v1.values.at(i, 1) == cplx{0.0, 0.0});

    auto r2 = patch_sections(u1, perturbed(0.5e-3), f, pair.ctx, P, 0.5);
    double n1 = std::max(sup_norm(r1.v1.values), sup_norm(r1.v2.values));
    double n2 = std::max(sup_norm(r2.v1.values), sup_norm(r2.v2.values));
    CHECK(std::abs(n2 - 0.5 * n1) <= 0.25 * 0.5 * n1);
}

TEST_CASE("patch_sections rejects a mismatch beyond delta") {
    DiskPair pair(0.04);
    auto f = identity_transition(2);
    auto u1 = affine_section(pair.k1, {0.0, 0.0}, {0.0, 0.0});
    auto u2 = affine_section(pair.k2, {5.0, 0.0}, {0.0, 0.0});  // wildly off
    CHECK_THROWS(patch_sections(u1, u2, f, pair.ctx, {}, 0.05));
}

TEST_CASE("glue_good_pair: holomorphic polynomial section is reproduced") {
    double h = 0.02;
    DiskPair pair(h);
    auto f = identity_transition(2);
    auto poly = [](cplx z) { return std::vector<cplx>{0.1 * z * z - 0.2 * z}; };
    auto t_a = SectionChart::from_function(pair.k1, 2, poly);
    auto t_b = SectionChart::from_function(pair.k2, 2, poly);
    // B: a small disk past the right edge of K2, overlapping it.
    auto B = build_compact({make_disk({1.45, 0.0}, 0.12)}, h);
    OracleSpec oracle;
    oracle.blend_r_in = 2 * h;
    oracle.blend_r_out = 4 * h;
    oracle.fit_collar = 0.25;
    auto res = glue_good_pair(t_a, t_b, f, {}, B, 0.05, oracle);
    CHECK(res.glue_residual <= 1e-9);
    CHECK(res.oracle_error <= 1e-9);   // polynomial data fits exactly
    CHECK(res.v_norm <= 1e-9);
    // The extension reaches B and stays holomorphic near K2 cap B.
    CHECK(res.kb_ext->size() > pair.k2->size());
    std::vector<bool> mask(res.kb_ext->size(), false);
    SpatialHash bh(B);
    for (std::size_t i = 0; i < res.kb_ext->size(); ++i)
        mask[i] = bh.nearest_distance(res.kb_ext->pos(i)) <= 2 * h;
    auto cr = cr_residual(res.out_b.values.component(0), mask);
    CHECK(cr.max <= 10 * h * (1 + 1.0));
}

TEST_CASE("glue_good_pair: non-holomorphic data near B is replaced holomorphically") {
    double h = 0.01;
    DiskPair pair(h);
    auto f = identity_transition(2);
    // |z|^2-style data: the oracle only needs to fix it near B.
    auto data = [](cplx z) { return std::vector<cplx>{cplx(std::norm(z), 0.0) * 0.2}; };
    auto t_a = SectionChart::from_function(pair.k1, 2, data);
    auto t_b = SectionChart::from_function(pair.k2, 2, data);
    auto B = build_compact({make_disk({1.46, 0.0}, 0.05)}, h);
    OracleSpec oracle;
    oracle.blend_r_in = 0.02;
    oracle.blend_r_out = 0.05;
    oracle.fit_collar = 0.1;
    oracle.target = 0.045;
    std::vector<cplx> P = {{0.5, 0.0}};
    auto res = glue_good_pair(t_a, t_b, f, P, B, 0.1, oracle);
    CHECK(res.oracle_error <= 0.045);
    CHECK(res.glue_residual <= 1e-8);
    // Exact at P.
    int ip = res.kb_ext->find_sample({0.5, 0.0});
    REQUIRE(ip >= 0);
    CHECK(std::abs(res.out_b.values.at(std::size_t(ip), 0) - cplx{0.05, 0.0}) <= 1e-9);
    // cr residual O(h) in the pure-fit zone.
    std::vector<bool> mask(res.kb_ext->size(), false);
    SpatialHash bh(B);
    for (std::size_t i = 0; i < res.kb_ext->size(); ++i)
        mask[i] = bh.nearest_distance(res.kb_ext->pos(i)) <= oracle.blend_r_in;
    auto cr = cr_residual(res.out_b.values.component(0), mask);
    if (!cr.vacuous) CHECK(cr.max <= 10 * h * (1 + 0.5));
}
