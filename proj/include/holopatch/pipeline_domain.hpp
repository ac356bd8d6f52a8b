#ifndef HOLOPATCH_PIPELINE_DOMAIN_HPP
#define HOLOPATCH_PIPELINE_DOMAIN_HPP

#include "holopatch/pipeline_graph.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// Two-dimensional sets. Smooth closures run the slab pipeline directly: pick a
// generic fiber direction, decompose into strips, split the boundary into
// I1 / I2 / I3 pieces, and bump three times (I1, I2, then I3 over the once-
// bumped domain). Class-c2 unions first bump disks around the nonsmooth
// points, swallow them into a smoothed domain, and continue with the same
// machinery; the crossing points where bump circles meet the old boundary are
// the new protected points.
// ----------------------------------------------------------------------------

struct DomainPipelineConstants {
    double margin_cells = 2.0;       // I1/I2 keep this far from foreign strips
    double min_bump_cells = 6.0;     // bump disks must be at least this big
    double bump_cap_cells = 14.0;
    double blend_in = 2.0;
    double blend_out = 4.0;
    double fit_collar = 14.0;
};

namespace detail {

/// Boundary classification against a slab decomposition.
struct BoundaryZones {
    // Component lists of boundary samples (positions), in walk order.
    std::vector<std::vector<cplx>> i1, i2, i3;
};

inline BoundaryZones classify_boundary(const DiscretizedCompact& k, const SlabDecomposition& sd,
                                       double margin) {
    BoundaryZones out;
    auto zone_of = [&](cplx pos) {
        double x = sd.abscissa(pos);
        int members = 0, home = -1;
        for (std::size_t j = 0; j < sd.cuts.size(); ++j)
            if (std::abs(x - sd.cuts[j]) <= sd.half_widths[j]) {
                ++members;
                home = int(j);
            }
        if (members != 1) return 3;
        // Margin against foreign strips.
        for (std::size_t j = 0; j < sd.cuts.size(); ++j) {
            if (int(j) == home) continue;
            if (std::abs(x - sd.cuts[j]) <= sd.half_widths[j] + margin) return 3;
        }
        return (home + 1) % 2 == 1 ? 1 : 2;
    };
    // Group consecutive boundary samples of equal zone; a distance jump starts
    // a new run (primitive change).
    const auto& bs = k.boundary_samples;
    require(!bs.empty(), "classify_boundary: no boundary samples");
    int prev_zone = -1;
    cplx prev_pos{1e300, 0};
    std::vector<cplx>* cur = nullptr;
    for (const auto& b : bs) {
        int z = zone_of(b.pos);
        bool jump = std::abs(b.pos - prev_pos) > 4.0 * k.h;
        if (z != prev_zone || jump || cur == nullptr) {
            auto& pool = (z == 1 ? out.i1 : z == 2 ? out.i2 : out.i3);
            pool.emplace_back();
            cur = &pool.back();
        }
        cur->push_back(b.pos);
        prev_zone = z;
        prev_pos = b.pos;
    }
    return out;
}

/// Disk chain along an ordered point run.
inline std::vector<SetPrimitive> disk_chain(const std::vector<cplx>& run, double radius) {
    std::vector<SetPrimitive> out;
    cplx last{1e300, 0};
    for (cplx p : run) {
        if (std::abs(p - last) < 0.45 * radius) continue;
        out.push_back(make_disk(p, radius));
        last = p;
    }
    if (out.empty() && !run.empty()) out.push_back(make_disk(run.front(), radius));
    return out;
}

struct FilteredBoundary {
    std::vector<BoundarySample> kept;
    std::vector<cplx> crossings;
};

/// Keep boundary samples of each part that are not strictly inside any part's
/// region; transitions along a part's walk mark the crossing points.
inline FilteredBoundary filter_union_boundary(
    const std::vector<const DiscretizedCompact*>& parts, double h) {
    FilteredBoundary out;
    auto strictly_inside_any = [&](cplx z) {
        for (const auto* part : parts)
            if (part->primitives && part->primitives->strictly_inside(z, 0.5 * h)) return true;
        return false;
    };
    for (const auto* part : parts) {
        bool prev_keep = false;
        cplx prev_pos{1e300, 0};
        bool has_prev = false;
        for (const auto& b : part->boundary_samples) {
            bool keep = !strictly_inside_any(b.pos);
            bool jump = std::abs(b.pos - prev_pos) > 4.0 * h;
            if (keep) out.kept.push_back(b);
            if (has_prev && !jump && keep != prev_keep)
                out.crossings.push_back(0.5 * (b.pos + prev_pos));
            prev_keep = keep;
            prev_pos = b.pos;
            has_prev = true;
        }
    }
    return out;
}

/// Union of parts with combined primitives, filtered boundary, and interior
/// flags that account for samples buried inside other parts.
struct UnionResult {
    std::shared_ptr<const DiscretizedCompact> compact;
    std::vector<cplx> crossings;
};

inline UnionResult union_with_boundary(const std::vector<const DiscretizedCompact*>& parts) {
    require(!parts.empty(), "union_with_boundary: no parts");
    double h = parts.front()->h;
    DiscretizedCompact acc = *parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = union_compact(acc, *parts[i]);

    // Combined primitive set.
    std::vector<SetPrimitive> prims;
    for (const auto* part : parts) {
        require(part->primitives != nullptr, "union_with_boundary: a part has no primitives");
        for (const auto& p : part->primitives->primitives()) prims.push_back(p);
    }
    acc.primitives = std::make_shared<PrimitiveSet>(std::move(prims), h);

    auto fb = filter_union_boundary(parts, h);
    acc.boundary_samples = fb.kept;
    for (auto& s : acc.samples)
        if (!s.is_interior) {
            for (const auto* part : parts)
                if (part->primitives && part->primitives->strictly_inside(s.pos, 1e-9)) {
                    s.is_interior = true;
                    break;
                }
        }
    finalize_compact(acc);
    UnionResult out;
    out.compact = std::make_shared<DiscretizedCompact>(std::move(acc));
    out.crossings = fb.crossings;
    return out;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// The slab bumping core, shared by demo_domain and demo_c2.
// ----------------------------------------------------------------------------

struct DomainCoreResult {
    ChartZones zones;  // final (chart-1 zone, chart-2 zone)
};

inline DomainCoreResult run_domain_bumping(const PipelineConfig& cfg,
                                           std::shared_ptr<const DiscretizedCompact> k,
                                           const SampledMap& t1_values,
                                           const std::vector<cplx>& protected_points,
                                           const std::vector<cplx>& p_snapped, double eta_pass,
                                           RunReport& rep) {
    const double h = cfg.h;
    DomainPipelineConstants dc;
    auto trans = make_transition(cfg.transition, cfg.transition_params, cfg.transition_params_b);
    const TransitionMap& f12 = trans.forward;
    const TransitionMap& f21 = trans.inverse;

    auto run_pass = [&](const char* name, const SectionChart& t_a, const SectionChart& t_b,
                        const TransitionMap& f_ab, const DiscretizedCompact& B, OracleSpec os) {
        detail::StageTimer timer;
        PatchOptions popt;
        popt.seed = cfg.seed ^ std::hash<std::string>{}(name);
        os.blend_r_in = dc.blend_in * h;
        os.blend_r_out = dc.blend_out * h;
        os.fit_collar = dc.fit_collar * h;
        os.target = eta_pass / 2.0;
        auto res = glue_good_pair(t_a, t_b, f_ab, p_snapped, B, eta_pass, os, popt);
        StageLog log;
        log.name = name;
        log.glue_residual = res.glue_residual;
        log.v_norm = res.v_norm;
        log.oracle_error = res.oracle_error;
        log.oracle_degree = res.oracle_degree;
        log.newton_iterations = res.newton_iterations;
        log.eta = eta_pass;
        log.time_ms = timer.ms();
        rep.stages.push_back(log);
        rep.total_newton_iterations += res.newton_iterations;
        return res;
    };

    // ---- direction and slabs ----
    auto dir = choose_generic_direction(*k, protected_points);
    std::vector<SlabRequirement> reqs;
    for (cplx p : protected_points) reqs.push_back({p, 0});
    auto sd = slab_decompose(k, dir.v, cfg.delta, reqs);
    auto [k1, k2] = slab_parity_pair(sd);
    require(!k1->empty() && !k2->empty(), "domain: a parity class is empty");

    auto zones_bd = detail::classify_boundary(*k, sd, dc.margin_cells * h);

    ChartZones zones;
    zones.k1 = k1;
    zones.k2 = k2;
    {
        SectionChart whole = SectionChart::from_scalar(t1_values);
        zones.rep1 = whole.restricted(k1);
        zones.rep2 = whole.restricted(k2).pushed(f12);
    }

    SpatialHash hash2(*k2);
    auto bump_radius = [&](const std::vector<std::vector<cplx>>& comps, const SpatialHash& avoid) {
        double g = 1e300;
        for (const auto& run : comps)
            for (cplx p : run) g = std::min(g, avoid.nearest_distance(p));
        double r = std::min(0.45 * g, dc.bump_cap_cells * h);
        require(r >= dc.min_bump_cells * h, "domain: bump radius below resolution floor");
        return r;
    };
    auto chain_compact = [&](const std::vector<std::vector<cplx>>& comps, double r) {
        std::vector<SetPrimitive> prims;
        for (const auto& run : comps) {
            auto chain = detail::disk_chain(run, r);
            prims.insert(prims.end(), chain.begin(), chain.end());
        }
        return build_compact(std::move(prims), h);
    };

    // ---- pass 1: bump I1 (odd-side boundary); pair (even, odd) ----
    std::shared_ptr<const DiscretizedCompact> b1_compact;
    {
        require(!zones_bd.i1.empty(), "domain: empty I1 boundary zone");
        double r = bump_radius(zones_bd.i1, hash2);
        auto B1 = chain_compact(zones_bd.i1, r);
        OracleSpec os;
        auto res = run_pass("B1", zones.rep2, zones.rep1, f21, B1, os);
        zones.rep2 = res.out_a;
        zones.rep1 = res.out_b;
        zones.k1 = res.kb_ext;
        b1_compact = std::make_shared<DiscretizedCompact>(std::move(B1));
    }
    // ---- pass 2: bump I2; pair (odd + B1, even) ----
    std::shared_ptr<const DiscretizedCompact> b2_compact;
    {
        require(!zones_bd.i2.empty(), "domain: empty I2 boundary zone");
        SpatialHash avoid(*zones.k1);
        double r = bump_radius(zones_bd.i2, avoid);
        auto B2 = chain_compact(zones_bd.i2, r);
        OracleSpec os;
        auto res = run_pass("B2", zones.rep1, zones.rep2, f12, B2, os);
        zones.rep1 = res.out_a;
        zones.rep2 = res.out_b;
        zones.k2 = res.kb_ext;
        b2_compact = std::make_shared<DiscretizedCompact>(std::move(B2));
    }
    // ---- pass 3: smooth the bumped domain and finish along I3 ----
    {
        auto uni = detail::union_with_boundary({k.get(), b1_compact.get(), b2_compact.get()});
        auto omega_prime = uni.compact;

        auto dir2 = choose_generic_direction(*omega_prime, uni.crossings);
        std::vector<SlabRequirement> reqs2;
        for (cplx p : uni.crossings) reqs2.push_back({p, 0});
        // I3 midpoints go interior to odd strips of the new decomposition.
        std::vector<cplx> i3_mids;
        for (const auto& run : zones_bd.i3) {
            require(!run.empty(), "domain: empty I3 run");
            i3_mids.push_back(run[run.size() / 2]);
        }
        for (cplx p : i3_mids) reqs2.push_back({p, 1});
        auto sd2 = slab_decompose(omega_prime, dir2.v, cfg.delta, reqs2);
        auto [l1, l2] = slab_parity_pair(sd2);

        // Every I3 component must sit inside the exclusive zone of its strip.
        for (const auto& run : zones_bd.i3)
            for (cplx p : run) {
                double x = sd2.abscissa(p);
                int members = 0;
                for (std::size_t j = 0; j < sd2.cuts.size(); ++j)
                    if (std::abs(x - sd2.cuts[j]) <= sd2.half_widths[j]) ++members;
                require(members >= 1, "domain: I3 sample left the decomposition");
            }

        SectionChart rep_a = detail::chart1_on(zones, l2, f21).pushed(f12);
        SectionChart rep_b = detail::chart1_on(zones, l1, f21);
        SpatialHash avoid(*l2);
        double r3 = bump_radius(zones_bd.i3, avoid);
        auto B3 = chain_compact(zones_bd.i3, r3);
        auto res = run_pass("final", rep_a, rep_b, f21, B3, OracleSpec{});
        ChartZones fin;
        fin.k1 = res.kb_ext;  // L1 u B3, chart 1
        fin.rep1 = res.out_b;
        fin.k2 = l2;
        fin.rep2 = res.out_a;
        zones = fin;
    }

    DomainCoreResult out;
    out.zones = zones;
    return out;
}

// ----------------------------------------------------------------------------
// Shared report assembly
// ----------------------------------------------------------------------------

namespace detail {

inline void assemble_output(const PipelineConfig& cfg, PipelineOutput& out,
                            const ChartZones& zones, const std::vector<cplx>& p_snapped,
                            const TransitionMap& f21) {
    const double h = cfg.h;
    auto master = out.k;
    out.k_plus = std::make_shared<DiscretizedCompact>(inflate_compact(*master, 4.0 * h));
    out.approximant = SampledMap(out.k_plus, 1);
    for (std::size_t i = 0; i < out.k_plus->size(); ++i) {
        cplx pos = out.k_plus->pos(i);
        int i1 = zones.k1->find_sample(pos);
        if (i1 >= 0) {
            out.approximant.at(i, 0) = zones.rep1.values.at(std::size_t(i1), 0);
            continue;
        }
        int i2 = zones.k2->find_sample(pos);
        require(i2 >= 0, "pipeline: K+ sample not covered by the final zones");
        out.approximant.at(i, 0) = f21(zones.rep2.point(std::size_t(i2)))[0];
    }
    RunReport& rep = out.report;
    rep.h = h;
    rep.epsilon = cfg.epsilon;
    rep.seed = cfg.seed;
    rep.scale = std::max(1.0, sup_norm(out.input_values));
    double sup_err = 0.0;
    for (std::size_t i = 0; i < master->size(); ++i) {
        int ip = out.k_plus->find_sample(master->pos(i));
        require(ip >= 0, "pipeline: K sample missing from K+");
        sup_err = std::max(sup_err, std::abs(out.approximant.at(std::size_t(ip), 0) -
                                             out.projected_values.at(i, 0)));
    }
    rep.sup_error = sup_err;
    for (cplx p : p_snapped) {
        int ip = out.k_plus->find_sample(p);
        int ik = master->find_sample(p);
        rep.interpolation_residuals.push_back(
            {p, std::abs(out.approximant.at(std::size_t(ip), 0) -
                         out.input_values.at(std::size_t(ik), 0))});
    }
    auto cr = cr_residual(out.approximant);
    rep.cr_residual_max = cr.max;
    rep.cr_vacuous = cr.vacuous;
    rep.cr_eligible = cr.eligible;

    // Optional global fit of the approximant when the complement is connected.
    if (complement_connected(*out.k_plus)) {
        FitRequest req;
        for (std::size_t i = 0; i < out.k_plus->size(); ++i) {
            req.points.push_back(out.k_plus->pos(i));
            req.values.push_back(out.approximant.at(i, 0));
        }
        auto r = fit_holomorphic_escalating(req, std::max(1e-8, cfg.epsilon / 10.0), 24);
        rep.global_fit_available = true;
        rep.global_fit_error = r.achieved;
        rep.global_fit_degree = r.fit.degree;
    }
}

}  // namespace detail

// ----------------------------------------------------------------------------
// demo_domain: smooth closures
// ----------------------------------------------------------------------------

inline PipelineOutput demo_domain(const PipelineConfig& cfg) {
    detail::StageTimer total;
    PipelineOutput out;
    auto k = std::make_shared<DiscretizedCompact>(build_compact(cfg.primitives, cfg.h));
    require(!k->empty(), "demo_domain: empty set");
    bool has_interior = false;
    for (const auto& s : k->samples) has_interior = has_interior || s.is_interior;
    require(has_interior, "demo_domain: expected a two-dimensional set");
    out.k = k;
    out.input_values = SampledMap::from_function(k, cfg.input.f);
    auto p_snapped = detail::snap_points(*k, cfg.p_points,
                                         cfg.snap_radius > 0 ? cfg.snap_radius : cfg.h);

    detail::StageTimer proj_timer;
    auto proj = project_admissible(k, out.input_values, p_snapped, {}, cfg.epsilon);
    out.projected_values = proj.values;
    out.report.projection_distance = proj.distance;
    {
        StageLog log;
        log.name = "projection";
        log.oracle_error = proj.distance;
        log.time_ms = proj_timer.ms();
        out.report.stages.push_back(log);
    }

    auto core = run_domain_bumping(cfg, k, out.projected_values, {}, p_snapped,
                                   cfg.epsilon / 3.0, out.report);
    auto trans = make_transition(cfg.transition, cfg.transition_params, cfg.transition_params_b);
    detail::assemble_output(cfg, out, core.zones, p_snapped, trans.inverse);
    out.report.total_time_ms = total.ms();
    require(out.report.sup_error < cfg.epsilon, "demo_domain: epsilon not met");
    return out;
}

// ----------------------------------------------------------------------------
// demo_c2: unions of tangentially touching smooth closures
// ----------------------------------------------------------------------------

inline PipelineOutput demo_c2(const PipelineConfig& cfg) {
    if (cfg.nonsmooth_points.empty()) return demo_domain(cfg);  // N = 1 degenerates
    detail::StageTimer total;
    const double h = cfg.h;
    DomainPipelineConstants dc;
    PipelineOutput out;
    auto k = std::make_shared<DiscretizedCompact>(build_compact(cfg.primitives, h));
    require(!k->empty(), "demo_c2: empty set");
    out.k = k;
    out.input_values = SampledMap::from_function(k, cfg.input.f);
    auto p_snapped = detail::snap_points(*k, cfg.p_points,
                                         cfg.snap_radius > 0 ? cfg.snap_radius : h);

    detail::StageTimer proj_timer;
    auto proj = project_admissible(k, out.input_values, p_snapped, cfg.nonsmooth_points,
                                   cfg.epsilon);
    out.projected_values = proj.values;
    out.report.projection_distance = proj.distance;
    {
        StageLog log;
        log.name = "projection";
        log.oracle_error = proj.distance;
        log.time_ms = proj_timer.ms();
        out.report.stages.push_back(log);
    }

    auto trans = make_transition(cfg.transition, cfg.transition_params, cfg.transition_params_b);
    const TransitionMap& f12 = trans.forward;
    const TransitionMap& f21 = trans.inverse;
    double eta_pass = cfg.epsilon / 4.0;

    // ---- pre-pass: holomorphy around the nonsmooth points ----
    auto dir = choose_generic_direction(*k, cfg.nonsmooth_points);
    std::vector<SlabRequirement> reqs;
    for (cplx p : cfg.nonsmooth_points) reqs.push_back({p, 2});  // even strips
    auto sd = slab_decompose(k, dir.v, cfg.delta, reqs);
    auto [k1, k2] = slab_parity_pair(sd);

    ChartZones zones;
    zones.k1 = k1;
    zones.k2 = k2;
    SectionChart whole = SectionChart::from_scalar(out.projected_values);
    zones.rep1 = whole.restricted(k1);
    zones.rep2 = whole.restricted(k2).pushed(f12);

    SpatialHash hash1(*k1);
    double gap = 1e300;
    for (cplx p : cfg.nonsmooth_points) gap = std::min(gap, hash1.nearest_distance(p));
    double r_ns = std::min(0.45 * gap, dc.bump_cap_cells * h);
    require(r_ns >= dc.min_bump_cells * h, "demo_c2: nonsmooth bump radius below resolution");
    std::vector<SetPrimitive> ns_prims;
    for (cplx p : cfg.nonsmooth_points) ns_prims.push_back(make_disk(p, r_ns));
    auto b_pre = std::make_shared<DiscretizedCompact>(build_compact(std::move(ns_prims), h));

    {
        detail::StageTimer timer;
        OracleSpec os;
        os.blend_r_in = dc.blend_in * h;
        os.blend_r_out = dc.blend_out * h;
        os.fit_collar = dc.fit_collar * h;
        os.target = eta_pass / 2.0;
        PatchOptions popt;
        popt.seed = cfg.seed ^ 0xc2c2c2c2ull;
        auto res = glue_good_pair(zones.rep1, zones.rep2, f12, p_snapped, *b_pre, eta_pass, os,
                                  popt);
        zones.rep1 = res.out_a;
        zones.rep2 = res.out_b;
        zones.k2 = res.kb_ext;
        StageLog log;
        log.name = "nonsmooth";
        log.glue_residual = res.glue_residual;
        log.v_norm = res.v_norm;
        log.oracle_error = res.oracle_error;
        log.oracle_degree = res.oracle_degree;
        log.newton_iterations = res.newton_iterations;
        log.eta = eta_pass;
        log.time_ms = timer.ms();
        out.report.stages.push_back(log);
        out.report.total_newton_iterations += res.newton_iterations;
    }

    // ---- smoothed domain: swallow the tangencies, then run the slab core ----
    auto uni = detail::union_with_boundary({k.get(), b_pre.get()});
    auto omega2 = uni.compact;
    ChartZones pre = zones;
    SampledMap t1_on_omega2(omega2, 1);
    for (std::size_t i = 0; i < omega2->size(); ++i) {
        cplx pos = omega2->pos(i);
        int i1 = pre.k1->find_sample(pos);
        if (i1 >= 0) {
            t1_on_omega2.at(i, 0) = pre.rep1.values.at(std::size_t(i1), 0);
        } else {
            int i2 = pre.k2->find_sample(pos);
            require(i2 >= 0, "demo_c2: smoothed-domain sample not covered");
            t1_on_omega2.at(i, 0) = f21(pre.rep2.point(std::size_t(i2)))[0];
        }
    }

    auto core = run_domain_bumping(cfg, omega2, t1_on_omega2, uni.crossings, p_snapped, eta_pass,
                                   out.report);
    detail::assemble_output(cfg, out, core.zones, p_snapped, f21);
    out.report.total_time_ms = total.ms();
    require(out.report.sup_error < cfg.epsilon, "demo_c2: epsilon not met");
    return out;
}

}  // namespace holopatch

#endif
