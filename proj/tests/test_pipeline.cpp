#include <doctest.h>

#include "fixtures.hpp"
#include "holopatch/pipeline.hpp"

using namespace holopatch;

namespace {

InputMap conj_input() { return {[](cplx z) { return std::conj(z); }, "conj"}; }

InputMap kink_input(double at) {
    return {[at](cplx z) { return cplx{std::abs(z.real() - at), 0.0}; }, "abs_kink"};
}

}  // namespace

TEST_CASE("zero-dim: exactness on finite point sets") {
    PipelineConfig cfg;
    cfg.h = 0.02;
    cfg.epsilon = 1e-3;
    for (cplx c : {cplx{0, 0}, cplx{1, 0}, cplx{0, 1}})
        cfg.primitives.push_back(make_disk(c, 0.005));
    cfg.p_points = {};
    cfg.input = conj_input();
    auto out = demo_zero_dim(cfg);
    CHECK(out.report.sup_error <= 1e-9);
    CHECK(out.report.cr_residual_max <= 1e-9);
}

TEST_CASE("zero-dim: 20 random separated points, exact") {
    PipelineConfig cfg;
    cfg.h = 0.02;
    cfg.epsilon = 1e-6;
    Rng rng(7);
    std::vector<cplx> pts;
    while (pts.size() < 20) {
        cplx c = 3.0 * rng.unit_disk();
        bool ok = true;
        for (cplx q : pts) ok = ok && std::abs(q - c) > 0.25;
        if (ok) pts.push_back(c);
    }
    for (cplx c : pts) cfg.primitives.push_back(make_disk(c, 0.004));
    cfg.input = conj_input();
    auto out = demo_zero_dim(cfg);
    CHECK(out.report.sup_error <= 1e-9);
}

TEST_CASE("zero-dim: three small disks with conj data meet 1e-3") {
    PipelineConfig cfg;
    cfg.h = 0.004;
    cfg.epsilon = 1e-3;
    for (cplx c : {cplx{0, 0}, cplx{0.5, 0}, cplx{0.2, 0.4}})
        cfg.primitives.push_back(make_disk(c, 0.01));
    cfg.input = conj_input();
    auto out = demo_zero_dim(cfg);
    CHECK(out.report.sup_error < 1e-3);
    PipelineConfig bad = cfg;
    bad.primitives.push_back(make_disk({0.013, 0.0}, 0.01));
    CHECK_THROWS(demo_zero_dim(bad));
}

TEST_CASE("segment: kink input with interpolation at both ends and the kink") {
    PipelineConfig cfg;
    cfg.h = 0.02;
    cfg.epsilon = 0.05;
    cfg.primitives.push_back(make_polyline({{0.0, 0.0}, {6.0, 0.0}}));
    cfg.p_points = {{0.0, 0.0}, {3.0, 0.0}, {6.0, 0.0}};
    cfg.input = kink_input(3.0);
    cfg.seed = 11;
    auto out = a3_to_a2(cfg);
    CHECK(out.report.sup_error < cfg.epsilon);
    for (const auto& ir : out.report.interpolation_residuals)
        CHECK(ir.residual <= 1e-9 * out.report.scale);
    CHECK_FALSE(out.report.cr_vacuous);
    CHECK(out.report.cr_residual_max <= 10 * cfg.h * (1 + out.report.scale));
    CHECK(out.report.stages.size() == 3);

    FitRequest req;
    for (std::size_t i = 0; i < out.k->size(); ++i) {
        req.points.push_back(out.k->pos(i));
        req.values.push_back(out.input_values.at(i, 0));
    }
    auto oracle = fit_holomorphic_escalating(req, cfg.epsilon, 40);
    CHECK(oracle.achieved < cfg.epsilon);
}
