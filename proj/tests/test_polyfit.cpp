#include <doctest.h>

#include "fixtures.hpp"
#include "holopatch/polyfit.hpp"

using namespace holopatch;

TEST_CASE("polynomial data is recovered exactly") {
    FitRequest req;
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        cplx z = 2.0 * rng.unit_disk();
        req.points.push_back(z);
        req.values.push_back(1.0 + 0.5 * z - 0.25 * z * z * z);
    }
    req.degree = 4;
    auto f = fit_holomorphic(req);
    for (int i = 0; i < 50; ++i) {
        cplx z = req.points[i];
        CHECK(std::abs(f.eval(z) - req.values[i]) < 1e-10);
    }
}

TEST_CASE("constraints are honored exactly while fitting") {
    FitRequest req;
    Rng rng(43);
    for (int i = 0; i < 300; ++i) {
        double x = rng.uniform(-1.0, 1.0);
        req.points.push_back({x, 0.0});
        req.values.push_back({std::abs(x), 0.0});
    }
    req.constraint_pts = {{0.5, 0.0}, {-1.0, 0.0}};
    req.constraint_vals = {{0.5, 0.0}, {1.0, 0.0}};
    req.degree = 10;
    auto f = fit_holomorphic(req);
    CHECK(std::abs(f.eval({0.5, 0.0}) - cplx{0.5, 0.0}) < 1e-11);
    CHECK(std::abs(f.eval({-1.0, 0.0}) - cplx{1.0, 0.0}) < 1e-11);
    double err = 0.0;
    for (std::size_t i = 0; i < req.points.size(); ++i)
        err = std::max(err, std::abs(f.eval(req.points[i]) - req.values[i]));
    CHECK(err < 0.2);  // |x| fit at degree 10
}

TEST_CASE("degree escalation meets a target on smooth data") {
    FitRequest req;
    Rng rng(47);
    for (int i = 0; i < 400; ++i) {
        cplx z = rng.unit_disk();
        req.points.push_back(z);
        req.values.push_back(std::exp(z));
    }
    auto r = fit_holomorphic_escalating(req, 1e-9, 24);
    CHECK(r.met_target);
    CHECK(r.achieved <= 1e-9);
}

TEST_CASE("Laurent pole handles annulus data") {
    auto ann = annulus_compact(0.5, 1.0, 0.05);
    FitRequest req;
    for (std::size_t i = 0; i < ann->size(); ++i) {
        req.points.push_back(ann->pos(i));
        req.values.push_back(std::conj(ann->pos(i)) * 0.0 + 0.7 / ann->pos(i) + 0.3 * ann->pos(i));
    }
    req.poles = {cplx{0, 0}};
    auto r = fit_holomorphic_escalating(req, 1e-8, 16);
    CHECK(r.met_target);
}

TEST_CASE("complement connectivity: disk yes, annulus no; hole centers found") {
    auto disk = disk_compact({0.3, -0.1}, 0.8, 0.05);
    CHECK(complement_connected(*disk));
    auto ann = annulus_compact(0.5, 1.0, 0.05);
    CHECK_FALSE(complement_connected(*ann));
    auto holes = complement_hole_centers(*ann);
    REQUIRE(holes.size() == 1);
    CHECK(std::abs(holes[0]) < 0.1);
}
