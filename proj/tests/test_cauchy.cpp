#include <doctest.h>

#include "fixtures.hpp"
#include "holopatch/cauchy.hpp"

using namespace holopatch;

namespace {

// Closed-form transform of the unit-disk indicator: conj(z) inside, 1/z outside
// (continuous across |z| = 1).
cplx disk_oracle(cplx z) { return std::abs(z) <= 1.0 ? std::conj(z) : 1.0 / z; }

}  // namespace

TEST_CASE("lambda == 0 transforms to 0") {
    auto k = disk_compact({0, 0}, 1.0, 0.05);
    auto lam = SampledMap(k, 1);
    CauchyKernelPlan plan{k, {{0.5, 0.0}, {2.0, 0.0}}, SingularCellPolicy::cell_closed_form};
    for (cplx v : cauchy_transform_values(lam, plan)) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("disk identity: interior and exterior probes within 3h") {
    double h = 0.05;
    auto k = disk_compact({0, 0}, 1.0, h);
    auto lam = SampledMap::from_function(k, [](cplx) { return cplx{1.0, 0.0}; });
    CauchyKernelPlan plan{k, {{0.5, 0.0}, {2.0, 0.0}, {0.1, -0.3}, {-1.7, 0.4}},
                         SingularCellPolicy::cell_closed_form};
    auto v = cauchy_transform_values(lam, plan);
    for (std::size_t i = 0; i < plan.targets.size(); ++i)
        CHECK(std::abs(v[i] - disk_oracle(plan.targets[i])) <= 3 * h);
    // Convention lock: positive real part at z = 0.5 (the zbar branch).
    CHECK(v[0].real() > 0.0);
    // Secondary oracle: h/4 quadrature with the skip policy agrees at z=2.
    auto kf = disk_compact({0, 0}, 1.0, h / 4);
    auto lamf = SampledMap::from_function(kf, [](cplx) { return cplx{1.0, 0.0}; });
    CauchyKernelPlan planf{kf, {{2.0, 0.0}}, SingularCellPolicy::skip};
    CHECK(std::abs(cauchy_transform_values(lamf, planf)[0] - v[1]) <= 3 * h);
}

TEST_CASE("linearity to 1e-12 scale") {
    auto k = disk_compact({0, 0}, 1.0, 0.1);
    auto l1 = SampledMap::from_function(k, [](cplx z) { return z * z; });
    auto l2 = SampledMap::from_function(k, [](cplx z) { return std::conj(z) + cplx{0, 1}; });
    cplx a{0.3, 1.2}, b{-0.8, 0.1};
    CauchyKernelPlan plan{k, {{0.4, 0.1}, {1.5, -0.2}}, SingularCellPolicy::cell_closed_form};
    auto va = cauchy_transform_values(l1, plan);
    auto vb = cauchy_transform_values(l2, plan);
    auto both = a * l1 + b * l2;
    auto vc = cauchy_transform_values(both, plan);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::abs(vc[i] - (a * va[i] + b * vb[i])) <= 1e-12 * (std::abs(va[i]) + std::abs(vb[i]) + 1));
}

TEST_CASE("decay bound outside the support") {
    auto k = disk_compact({0, 0}, 1.0, 0.1);
    auto lam = SampledMap::from_function(k, [](cplx z) { return std::exp(z) - 0.5 * std::conj(z); });
    double mass = 0.0;
    for (std::size_t i = 0; i < k->size(); ++i)
        mass += std::abs(lam.at(i, 0)) * k->samples[i].weight;
    Rng rng(19);
    std::vector<cplx> targets;
    for (int i = 0; i < 25; ++i) targets.push_back((1.5 + 3.0 * rng.uniform()) *
                                                   std::polar(1.0, 2 * kPi * rng.uniform()));
    CauchyKernelPlan plan{k, targets, SingularCellPolicy::cell_closed_form};
    auto v = cauchy_transform_values(lam, plan);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double dist = std::abs(targets[i]) - 1.0;
        CHECK(std::abs(v[i]) <= mass / (kPi * dist) * (1 + 0.2));
    }
}

TEST_CASE("solve_dbar: residual O(h) on the support, holomorphy off it at order >= 2") {
    double maxres[2], holo[2];
    double hs[2] = {0.1, 0.05};
    for (int t = 0; t < 2; ++t) {
        double h = hs[t];
        auto grid = disk_compact({0, 0}, 2.0, h);
        // Smooth bump supported in D(0, 0.5).
        auto lam_grid = SampledMap::from_function(grid, [](cplx z) {
            double r2 = std::norm(z) / 0.25;
            return r2 >= 1.0 ? cplx{0, 0} : cplx{std::exp(-1.0 / (1.0 - r2)), 0.0};
        });
        auto u = solve_dbar(lam_grid, grid);
        auto res = cr_residual(u);
        // dbar(u) should match lambda well inside the support.
        double worst = 0.0;
        for (std::size_t i = 0; i < grid->size(); ++i) {
            if (res.per_sample[i] < 0) continue;
            if (std::abs(grid->pos(i)) < 0.5 - 4 * h) {
                // residual field holds |dbar u|; compare against |lambda|
                double dev = std::abs(res.per_sample[i] - std::abs(lam_grid.at(i, 0)));
                worst = std::max(worst, dev);
            }
        }
        maxres[t] = worst;
        // Holomorphic in the annulus 0.8 < |z| < 1.6.
        double ho = 0.0;
        for (std::size_t i = 0; i < grid->size(); ++i) {
            if (res.per_sample[i] < 0) continue;
            double r = std::abs(grid->pos(i));
            if (r > 0.8 && r < 1.6) ho = std::max(ho, res.per_sample[i]);
        }
        holo[t] = ho;
    }
    CHECK(maxres[0] <= 1.0 * hs[0]);
    CHECK(maxres[1] <= 1.0 * hs[1]);
    CHECK(std::log2(holo[0] / holo[1]) >= 1.5);  // order >= 2 off the support

    // Margin violation is rejected.
    auto grid_small = disk_compact({0, 0}, 0.52, 0.1);
    auto lam_small = SampledMap::from_function(grid_small, [](cplx z) {
        return std::abs(z) < 0.5 ? cplx{1, 0} : cplx{0, 0};
    });
    CHECK_THROWS(solve_dbar(lam_small, grid_small));
}

TEST_CASE("lambda == 1 on the disk: dbar residual matches everywhere inside") {
    double h = 0.05;
    auto grid = disk_compact({0, 0}, 2.0, h);
    auto lam = SampledMap::from_function(grid, [](cplx z) {
        return std::abs(z) <= 1.0 ? cplx{1, 0} : cplx{0, 0};
    });
    auto u = cauchy_transform(lam, grid);
    // Pointwise agreement with the closed form, inside and out.
    double worst = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        double r = std::abs(grid->pos(i));
        if (std::abs(r - 1.0) < 2 * h) continue;  // oracle kink zone
        worst = std::max(worst, std::abs(u.at(i, 0) - disk_oracle(grid->pos(i))));
    }
    CHECK(worst <= 3 * h);
}
