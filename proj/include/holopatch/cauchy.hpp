#ifndef HOLOPATCH_CAUCHY_HPP
#define HOLOPATCH_CAUCHY_HPP

#include "holopatch/sampled_map.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// Cauchy transform over a discretized compact:
//
//     Lambda(z) = (1/pi) sum_zeta  lambda(zeta) w(zeta) / (z - zeta)
//
// The sign is pinned by the requirement that the discrete dbar of Lambda
// reproduce lambda on the support (lambda == 1 on the unit disk must give
// conj(z) inside and 1/z outside). Near-singular cells are integrated in
// closed form over the h x h cell, which restores O(h) accuracy on the
// diagonal; the `skip` policy simply drops sources closer than h/2.
// ----------------------------------------------------------------------------

enum class SingularCellPolicy { skip, cell_closed_form };

struct CauchyKernelPlan {
    std::shared_ptr<const DiscretizedCompact> source;
    std::vector<cplx> targets;
    SingularCellPolicy policy = SingularCellPolicy::cell_closed_form;
};

namespace detail {

/// Integral of 1/u over the square with ccw corners u0..u3 (Green's theorem:
/// (1/2i) contour integral of conj(u)/u du). Valid when 0 is not on an edge.
inline cplx cell_integral_inv(const cplx c[4]) {
    cplx acc{0.0, 0.0};
    for (int e = 0; e < 4; ++e) {
        cplx a = c[e], b = c[(e + 1) % 4];
        cplx w = b - a;
        // edge integral of conj(u)/u du = conj(w) + (conj(a) w - a conj(w))/w * Log(b/a)
        cplx cross = std::conj(a) * w - a * std::conj(w);
        acc += std::conj(w) + (cross / w) * std::log(b / a);
    }
    return acc / cplx{0.0, 2.0};
}

}  // namespace detail

/// Transform a scalar map; lambda lives on plan.source.
inline std::vector<cplx> cauchy_transform_values(const SampledMap& lambda,
                                                 const CauchyKernelPlan& plan) {
    require(lambda.codim() == 1, "cauchy_transform: lambda must be scalar");
    require(!plan.targets.empty(), "cauchy_transform: target list is empty");
    const auto& src = *plan.source;
    require(&lambda.domain() == &src || lambda.domain_ptr().get() == &src,
            "cauchy_transform: lambda not sampled on plan.source");
    const double h = src.h;
    const double near_radius = 2.0 * h;

    std::vector<cplx> out(plan.targets.size());
    SpatialHash hash(src);
    for (std::size_t t = 0; t < plan.targets.size(); ++t) {
        cplx z = plan.targets[t];
        KahanSumC acc;
        // Near sources handled per policy (collect indices to exclude from the
        // plain kernel pass).
        std::vector<std::size_t> near;
        hash.for_ball(z, near_radius, [&](std::size_t i) { near.push_back(i); });
        std::sort(near.begin(), near.end());
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (std::binary_search(near.begin(), near.end(), i)) continue;
            double w = src.samples[i].weight;
            if (w == 0.0) continue;
            cplx d = z - src.pos(i);
            acc.add(lambda.at(i, 0) * w / d);
        }
        for (std::size_t i : near) {
            double w = src.samples[i].weight;
            if (w == 0.0) continue;
            cplx zeta = src.pos(i);
            double dist = std::abs(z - zeta);
            if (plan.policy == SingularCellPolicy::skip) {
                if (dist >= 0.5 * h) acc.add(lambda.at(i, 0) * w / (z - zeta));
                continue;
            }
            // Closed form over the cell centered at zeta; scale by the clipped
            // weight fraction so boundary cells keep their area.
            cplx rel = z - zeta;
            bool on_edge = std::abs(std::abs(rel.real()) - 0.5 * h) < 1e-12 * h ||
                           std::abs(std::abs(rel.imag()) - 0.5 * h) < 1e-12 * h;
            if (on_edge) {
                if (dist >= 0.5 * h) acc.add(lambda.at(i, 0) * w / (z - zeta));
                continue;
            }
            cplx corners[4] = {rel - cplx{-0.5 * h, -0.5 * h}, rel - cplx{0.5 * h, -0.5 * h},
                               rel - cplx{0.5 * h, 0.5 * h}, rel - cplx{-0.5 * h, 0.5 * h}};
            // u = z - zeta' as zeta' walks the cell ccw keeps ccw orientation.
            cplx cell = detail::cell_integral_inv(corners);
            acc.add(lambda.at(i, 0) * (w / (h * h)) * cell);
        }
        out[t] = acc.value() / kPi;
    }
    return out;
}

inline SampledMap cauchy_transform(const SampledMap& lambda,
                                   std::shared_ptr<const DiscretizedCompact> targets,
                                   SingularCellPolicy policy = SingularCellPolicy::cell_closed_form) {
    CauchyKernelPlan plan;
    plan.source = lambda.domain_ptr();
    plan.targets.reserve(targets->size());
    for (std::size_t i = 0; i < targets->size(); ++i) plan.targets.push_back(targets->pos(i));
    plan.policy = policy;
    auto vals = cauchy_transform_values(lambda, plan);
    SampledMap out(std::move(targets), 1);
    for (std::size_t i = 0; i < vals.size(); ++i) out.at(i, 0) = vals[i];
    return out;
}

/// Solve dbar(u) = lambda on a grid compact covering supp(lambda) with margin 4h.
inline SampledMap solve_dbar(const SampledMap& lambda,
                             std::shared_ptr<const DiscretizedCompact> grid) {
    const auto& src = lambda.domain();
    const double h = src.h;
    require(std::abs(grid->h - h) < 1e-15, "solve_dbar: mismatched h");
    // Margin check: every lattice point within 4h of a supported source must
    // be a grid sample.
    double scale = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i)
        scale = std::max(scale, std::abs(lambda.at(i, 0)));
    int stride = int(std::ceil(4.0));
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (std::abs(lambda.at(i, 0)) <= 1e-14 * scale || src.samples[i].weight == 0.0) continue;
        cplx z = src.pos(i);
        for (int dj = -stride; dj <= stride; ++dj)
            for (int di = -stride; di <= stride; ++di) {
                cplx q = z + cplx{di * h, dj * h};
                if (std::abs(q - z) > 4.0 * h + 1e-12) continue;
                require(grid->has_sample(q), "solve_dbar: grid does not cover supp(lambda) with 4h margin");
            }
    }
    return cauchy_transform(lambda, std::move(grid));
}

}  // namespace holopatch

#endif
