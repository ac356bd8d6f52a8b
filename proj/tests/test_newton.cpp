#include <doctest.h>

#include "holopatch/newton.hpp"

using namespace holopatch;

namespace {

// Phi(h) = h + h^2/2 with Phi'(h) = 1 + h; closed-form solution of Phi(h) = g
// is h = -1 + sqrt(1 + 2g).
OperatorProblem<cplx> quadratic_problem() {
    return scalar_problem([](cplx h) { return h + 0.5 * h * h; },
                          [](cplx base, cplx rhs) { return rhs / (1.0 + base); },
                          cplx{0, 0}, /*radius=*/0.2, /*C=*/1.25);
}

}  // namespace

TEST_CASE("linear case solves in one iteration") {
    auto p = scalar_problem([](cplx h) { return 2.0 * h; },
                            [](cplx, cplx rhs) { return rhs / 2.0; }, cplx{0, 0}, 1.0, 0.5);
    auto r = solve_surjective(p, cplx{0.3, 0.0}, 1e-14, 10);
    CHECK(r.converged);
    CHECK(r.iterations <= 1);
    CHECK(std::abs(r.solution - cplx{0.15, 0.0}) < 1e-14);
}

TEST_CASE("zero target returns the center with zero iterations") {
    auto p = quadratic_problem();
    auto r = solve_surjective(p, cplx{0, 0}, 1e-12, 10);
    CHECK(r.iterations == 0);
    CHECK(std::abs(r.solution) == 0.0);
}

TEST_CASE("quadratic target matches the closed-form root to 1e-10") {
    auto p = quadratic_problem();
    auto r = solve_surjective(p, cplx{0.1, 0.0}, 1e-12, 30);
    CHECK(r.converged);
    CHECK(std::abs(r.solution - (std::sqrt(cplx{1.2, 0.0}) - 1.0)) < 1e-10);
    CHECK_FALSE(r.guaranteed);  // 0.1 > r/(2C) = 0.08
}

TEST_CASE("both derivative modes converge inside the guaranteed ball") {
    auto p = quadratic_problem();
    Rng rng(23);
    for (int t = 0; t < 25; ++t) {
        cplx g = (p.radius / (2 * p.bound_c)) * 0.999 * rng.unit_disk();
        cplx root = std::sqrt(1.0 + 2.0 * g) - 1.0;
        for (auto mode : {DerivativeMode::newton, DerivativeMode::frozen_at_center}) {
            auto r = solve_surjective(p, g, 1e-10, 30, mode);
            CHECK(r.guaranteed);
            CHECK(r.converged);
            CHECK(r.iterations <= 30);
            CHECK(r.step_norm_total <= p.radius);
            CHECK(std::abs(r.solution - root) < 1e-9);
        }
    }
}

TEST_CASE("monotone residual after the first iteration inside the ball") {
    auto p = quadratic_problem();
    Rng rng(31);
    for (int t = 0; t < 10; ++t) {
        cplx g = (p.radius / (2 * p.bound_c)) * 0.9 * rng.unit_disk();
        auto r = solve_surjective(p, g, 1e-12, 30);
        for (std::size_t i = 2; i < r.residual_log.size(); ++i)
            CHECK(r.residual_log[i] <= r.residual_log[i - 1] * (1 + 1e-12) + 1e-16);
    }
}

TEST_CASE("scale equivariance") {
    for (double s : {3.0, 0.25}) {
        auto p = scalar_problem([s](cplx h) { return s * (h + 0.5 * h * h); },
                                [s](cplx base, cplx rhs) { return rhs / (s * (1.0 + base)); },
                                cplx{0, 0}, 0.2, 1.25 / s);
        auto base = quadratic_problem();
        auto r0 = solve_surjective(base, cplx{0.05, 0.02}, 1e-13, 40);
        auto r1 = solve_surjective(p, s * cplx{0.05, 0.02}, 1e-13 * s, 40);
        CHECK(std::abs(r0.solution - r1.solution) < 1e-12);
    }
}

TEST_CASE("divergence detection fires on a broken contract") {
    // derivative_solve that overshoots wildly: residual never halves.
    auto p = scalar_problem([](cplx h) { return h; },
                            [](cplx, cplx rhs) { return 1e-7 * rhs; }, cplx{0, 0}, 10.0, 1.0);
    CHECK_THROWS_AS(solve_surjective(p, cplx{1.0, 0.0}, 1e-14, 50), std::runtime_error);
}

TEST_CASE("runtime bound violation is reported") {
    auto p = scalar_problem([](cplx h) { return h; },
                            [](cplx, cplx rhs) { return 3.0 * rhs; }, cplx{0, 0}, 10.0, 1.0);
    CHECK_THROWS_AS(solve_surjective(p, cplx{1.0, 0.0}, 1e-14, 50), std::invalid_argument);
}
