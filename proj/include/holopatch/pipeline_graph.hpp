#ifndef HOLOPATCH_PIPELINE_GRAPH_HPP
#define HOLOPATCH_PIPELINE_GRAPH_HPP

#include "holopatch/pipeline.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// One-dimensional sets (arcs and planar graphs): cover, bipartize into a good
// pair of red/blue closures, then three bumping passes. Pass 1 makes the
// section holomorphic on disks around the red cores, pass 2 around the blue
// cores, and the final pass re-pairs the set around the cover overlaps (plus
// any core-less short pieces) and finishes the neighborhood.
//
// Geometry constants in units of h; coverage of the 4h certificate collar
// needs r_core - r_b < r_b3 with slack, which the defaults satisfy.
// ----------------------------------------------------------------------------

struct GraphPipelineConstants {
    double ell_ov = 12.0;   // cover overlap arc length
    double r_core = 22.0;   // core = piece samples at least this far from overlaps
    double r_b = 15.0;      // pass-1/2 bump radius around cores
    double r_b3 = 13.0;     // final-pass bump radius around overlaps
    double l_cut = 22.0;    // final pair: a-side beyond this distance
    double r_w = 30.0;      // final pair: b-side within this distance
    double blend_in = 2.0;
    double blend_out = 4.0;
    double fit_collar = 14.0;
    double piece_len = 110.0;
};

namespace detail {

/// Ordered master sample indices along one polyline primitive.
inline std::vector<std::size_t> polyline_indices(const DiscretizedCompact& master,
                                                 const PolylinePrimitive& arc) {
    std::vector<std::size_t> out;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < arc.vertices.size(); ++i)
        total += std::abs(arc.vertices[i + 1] - arc.vertices[i]);
    int n = std::max(1, int(std::round(total / master.h)));
    double step = total / n;
    std::size_t seg = 0;
    double seg_used = 0.0;
    for (int m = 0; m <= n; ++m) {
        double target = std::min(step * m, total);
        while (seg + 2 < arc.vertices.size() &&
               seg_used + std::abs(arc.vertices[seg + 1] - arc.vertices[seg]) < target - 1e-15) {
            seg_used += std::abs(arc.vertices[seg + 1] - arc.vertices[seg]);
            ++seg;
        }
        cplx d = arc.vertices[seg + 1] - arc.vertices[seg];
        double t = (target - seg_used) / std::abs(d);
        cplx pos = (m == n) ? arc.vertices.back() : arc.vertices[seg] + std::min(t, 1.0) * d;
        if (m == 0) pos = arc.vertices.front();
        int idx = master.find_sample(pos);
        require(idx >= 0, "graph cover: polyline walk sample missing from the master");
        if (out.empty() || out.back() != std::size_t(idx)) out.push_back(std::size_t(idx));
    }
    return out;
}

struct GraphStructure {
    std::vector<std::vector<std::size_t>> edge_walks;  // ordered indices per edge
    std::vector<cplx> vertices;                        // endpoint positions
    std::vector<std::vector<std::size_t>> vertex_edges;  // incident edge ids
    std::vector<cplx> branch_points;                     // degree >= 3
    bool single_closed_loop = false;
    bool single_open_chain = false;
    std::vector<std::size_t> chain_walk;  // concatenated walk when chain/loop
};

inline GraphStructure analyze_graph(const DiscretizedCompact& master) {
    GraphStructure g;
    require(master.primitives != nullptr, "graph pipeline: master has no primitives");
    for (const auto& p : master.primitives->primitives()) {
        const auto* arc = std::get_if<PolylinePrimitive>(&p);
        require(arc != nullptr, "graph pipeline: only polyline primitives are supported");
        g.edge_walks.push_back(polyline_indices(master, *arc));
    }
    auto vertex_id = [&](cplx p) {
        for (std::size_t i = 0; i < g.vertices.size(); ++i)
            if (std::abs(g.vertices[i] - p) < 1e-9) return i;
        g.vertices.push_back(p);
        g.vertex_edges.emplace_back();
        return g.vertices.size() - 1;
    };
    std::vector<std::pair<std::size_t, std::size_t>> edge_ends;
    for (std::size_t e = 0; e < g.edge_walks.size(); ++e) {
        cplx a = master.pos(g.edge_walks[e].front());
        cplx b = master.pos(g.edge_walks[e].back());
        auto va = vertex_id(a), vb = vertex_id(b);
        g.vertex_edges[va].push_back(e);
        if (vb != va) g.vertex_edges[vb].push_back(e);
        edge_ends.push_back({va, vb});
    }
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
        if (g.vertex_edges[v].size() >= 3) g.branch_points.push_back(g.vertices[v]);

    if (g.branch_points.empty()) {
        // Paths and cycles: orient the edges into one walk.
        std::vector<char> used(g.edge_walks.size(), 0);
        // Start from a degree-1 vertex when present.
        std::size_t start_v = 0;
        bool open = false;
        for (std::size_t v = 0; v < g.vertices.size(); ++v)
            if (g.vertex_edges[v].size() == 1) {
                start_v = v;
                open = true;
                break;
            }
        std::size_t cur_v = start_v;
        std::vector<std::size_t> walk;
        for (std::size_t steps = 0; steps < g.edge_walks.size(); ++steps) {
            int next_e = -1;
            for (std::size_t e : g.vertex_edges[cur_v])
                if (!used[e]) {
                    next_e = int(e);
                    break;
                }
            require(next_e >= 0, "graph cover: disconnected 1D set");
            used[std::size_t(next_e)] = 1;
            auto w = g.edge_walks[std::size_t(next_e)];
            if (edge_ends[std::size_t(next_e)].first != cur_v) std::reverse(w.begin(), w.end());
            if (!walk.empty() && walk.back() == w.front()) w.erase(w.begin());
            walk.insert(walk.end(), w.begin(), w.end());
            cur_v = (edge_ends[std::size_t(next_e)].first == cur_v)
                        ? edge_ends[std::size_t(next_e)].second
                        : edge_ends[std::size_t(next_e)].first;
        }
        g.chain_walk = walk;
        g.single_open_chain = open;
        g.single_closed_loop = !open;
        if (g.single_closed_loop && !walk.empty() && walk.front() == walk.back())
            g.chain_walk.pop_back();
    }
    return g;
}

/// Arclength positions along a walk.
inline std::vector<double> walk_arclength(const DiscretizedCompact& master,
                                          const std::vector<std::size_t>& walk) {
    std::vector<double> s(walk.size(), 0.0);
    for (std::size_t i = 1; i < walk.size(); ++i)
        s[i] = s[i - 1] + std::abs(master.pos(walk[i]) - master.pos(walk[i - 1]));
    return s;
}

/// Windows along a chain/loop, boundaries shifted away from protected points.
inline Cover chain_cover(std::shared_ptr<const DiscretizedCompact> master,
                         const GraphStructure& g, double piece_len, double overlap_len,
                         const std::vector<cplx>& protected_points, int min_pieces) {
    const auto& walk = g.chain_walk;
    auto s = walk_arclength(*master, walk);
    double total = s.back();
    if (g.single_closed_loop) total += std::abs(master->pos(walk.front()) - master->pos(walk.back()));
    int m = std::max({min_pieces, 2, int(std::round(total / piece_len))});
    if (g.single_closed_loop) m = std::max(m, 3);
    double stride = total / m;
    require(stride > overlap_len * 2.5, "graph cover: pieces too short for the overlap length");

    // Choose the boundary offset keeping cut zones away from protected points.
    double best_off = 0.0, best_score = -1.0;
    for (int t = 0; t < 16; ++t) {
        double off = stride * t / 16.0;
        double score = 1e300;
        for (cplx p : protected_points) {
            // arclength of the protected point
            double sp = 0.0, dmin = 1e300;
            for (std::size_t i = 0; i < walk.size(); ++i) {
                double d = std::abs(master->pos(walk[i]) - p);
                if (d < dmin) {
                    dmin = d;
                    sp = s[i];
                }
            }
            if (dmin > 4.0 * master->h) continue;
            for (int c = 0; c <= m; ++c) {
                double cut = off + c * stride;
                double dist = std::abs(sp - cut);
                if (g.single_closed_loop) dist = std::min(dist, total - dist);
                score = std::min(score, dist);
            }
        }
        if (score > best_score) {
            best_score = score;
            best_off = off;
        }
    }

    Cover cover;
    cover.master = master;
    for (int p = 0; p < m; ++p) {
        double lo = best_off + p * stride - overlap_len / 2.0;
        double hi = best_off + (p + 1) * stride + overlap_len / 2.0;
        std::vector<std::size_t> el;
        for (std::size_t i = 0; i < walk.size(); ++i) {
            double si = s[i];
            bool inside = false;
            if (g.single_closed_loop) {
                for (int wrap = -1; wrap <= 1; ++wrap)
                    inside = inside || (si + wrap * total >= lo && si + wrap * total <= hi);
            } else {
                inside = si >= std::max(0.0, lo) && si <= std::min(total, hi);
                if (p == 0) inside = inside || si <= hi;
                if (p == m - 1) inside = inside || si >= lo;
            }
            if (inside) el.push_back(walk[i]);
        }
        std::sort(el.begin(), el.end());
        el.erase(std::unique(el.begin(), el.end()), el.end());
        require(!el.empty(), "graph cover: empty piece");
        cover.elements.push_back(el);
    }
    return cover;
}

/// Star + interior cover for graphs with branch vertices.
inline Cover star_cover(std::shared_ptr<const DiscretizedCompact> master, const GraphStructure& g,
                        double star_radius, double stub_len, double piece_len) {
    Cover cover;
    cover.master = master;
    // Stars at branch vertices.
    std::vector<cplx> branch = g.branch_points;
    for (cplx v : branch) {
        std::vector<std::size_t> el;
        for (const auto& walk : g.edge_walks)
            for (std::size_t i : walk)
                if (std::abs(master->pos(i) - v) <= star_radius) el.push_back(i);
        std::sort(el.begin(), el.end());
        el.erase(std::unique(el.begin(), el.end()), el.end());
        cover.elements.push_back(el);
    }
    // Interior pieces per edge: from star_radius - stub_len past each branch
    // endpoint (0 from leaves), chopped into windows when long.
    for (const auto& walk : g.edge_walks) {
        auto s = walk_arclength(*master, walk);
        double total = s.back();
        auto near_branch = [&](cplx p) {
            for (cplx v : branch)
                if (std::abs(p - v) < 1e-9) return true;
            return false;
        };
        double lo = near_branch(master->pos(walk.front())) ? star_radius - stub_len : 0.0;
        double hi = total - (near_branch(master->pos(walk.back())) ? star_radius - stub_len : 0.0);
        require(hi - lo > 3.0 * stub_len, "graph cover: edge too short between stars");
        int m = std::max(1, int(std::round((hi - lo) / piece_len)));
        double stride = (hi - lo) / m;
        for (int p = 0; p < m; ++p) {
            double plo = lo + p * stride - (p > 0 ? stub_len / 2.0 : 0.0);
            double phi = lo + (p + 1) * stride + (p + 1 < m ? stub_len / 2.0 : 0.0);
            std::vector<std::size_t> el;
            for (std::size_t i = 0; i < walk.size(); ++i)
                if (s[i] >= plo && s[i] <= phi) el.push_back(walk[i]);
            std::sort(el.begin(), el.end());
            require(!el.empty(), "graph cover: empty interior piece");
            cover.elements.push_back(el);
        }
    }
    return cover;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// The shared three-pass engine over a red/blue split of a 1D cover.
// ----------------------------------------------------------------------------

struct ChartZones {
    std::shared_ptr<const DiscretizedCompact> k1, k2;  // zone compacts
    SectionChart rep1;  // chart-1 on k1
    SectionChart rep2;  // chart-2 on k2
};

namespace detail {

inline SectionChart chart1_on(const ChartZones& z, std::shared_ptr<const DiscretizedCompact> dom,
                              const TransitionMap& f21) {
    SectionChart out;
    out.values = SampledMap(dom, z.rep1.n());
    int n = z.rep1.n();
    for (std::size_t i = 0; i < dom->size(); ++i) {
        cplx pos = dom->pos(i);
        int i1 = z.k1->find_sample(pos);
        if (i1 >= 0) {
            for (int r = 0; r < n; ++r) out.values.at(i, r) = z.rep1.values.at(std::size_t(i1), r);
        } else {
            int i2 = z.k2->find_sample(pos);
            require(i2 >= 0, "rezone: sample not covered by either chart zone");
            auto w = f21(z.rep2.point(std::size_t(i2)));
            for (int r = 0; r < n; ++r) out.values.at(i, r) = w[r];
        }
        out.values.at(i, n - 1) = pos;
    }
    return out;
}

}  // namespace detail

inline PipelineOutput demo_graph(const PipelineConfig& cfg) {
    detail::StageTimer total;
    const double h = cfg.h;
    GraphPipelineConstants gc;
    if (cfg.cover_piece_len > 0) gc.piece_len = cfg.cover_piece_len;

    PipelineOutput out;
    auto master = std::make_shared<DiscretizedCompact>(build_compact(cfg.primitives, h));
    require(!master->empty(), "demo_graph: empty set");
    out.k = master;
    out.input_values = SampledMap::from_function(master, cfg.input.f);
    out.projected_values = out.input_values;  // 1D data is admissible as-is
    auto p_snapped = detail::snap_points(*master, cfg.p_points,
                                         cfg.snap_radius > 0 ? cfg.snap_radius : h);

    auto trans = make_transition(cfg.transition, cfg.transition_params, cfg.transition_params_b);
    const TransitionMap& f12 = trans.forward;
    const TransitionMap& f21 = trans.inverse;

    // Chart-wise budget: chart-2 changes pull back through F21's block.
    double kappa = 1.0;
    for (std::size_t i = 0; i < master->size(); i += std::max<std::size_t>(1, master->size() / 64)) {
        std::vector<cplx> pt = {out.projected_values.at(i, 0), master->pos(i)};
        auto j = f21.jacobian(f12(pt));
        kappa = std::max(kappa, std::abs(j.A(0, 0)));
    }
    double eta_pass = cfg.epsilon / (3.0 * kappa);

    // ---- cover ----
    auto g = detail::analyze_graph(*master);
    std::vector<cplx> protect = p_snapped;
    for (cplx v : g.branch_points) protect.push_back(v);
    Cover cover;
    if (g.branch_points.empty()) {
        cover = detail::chain_cover(master, g, gc.piece_len * h, gc.ell_ov * h, protect,
                                    cfg.cover_min_pieces);
    } else {
        cover = detail::star_cover(master, g, (gc.ell_ov + gc.r_core + 6.0) * h, gc.ell_ov * h,
                                   gc.piece_len * h);
    }

    auto nerve_graph = nerve(cover);
    auto bip = bipartize_by_splitting(nerve_graph);
    for (auto [u, v] : bip.split_edges) cover = refine_cover_split(cover, u, v,
                                                                   {16.0, 8.0});
    auto nerve2 = nerve(cover);
    auto coloring = two_color(nerve2);
    require(coloring.ok, "demo_graph: cover nerve not bipartite after splitting");

    // ---- red/blue pair with cores ----
    std::vector<int> hits(master->size(), 0);
    for (const auto& el : cover.elements)
        for (std::size_t i : el) ++hits[i];
    std::vector<std::size_t> overlap_idx;
    for (std::size_t i = 0; i < master->size(); ++i)
        if (hits[i] >= 2) overlap_idx.push_back(i);
    std::vector<Sample> overlap_samples;
    for (std::size_t i : overlap_idx) overlap_samples.push_back(master->samples[i]);
    SpatialHash overlap_hash(overlap_samples, 2.0 * h);

    auto color_union = [&](int color) {
        std::vector<char> mask(master->size(), 0);
        for (std::size_t e = 0; e < cover.elements.size(); ++e)
            if (coloring.colors[int(e)] == color)
                for (std::size_t i : cover.elements[e]) mask[i] = 1;
        return std::make_shared<DiscretizedCompact>(
            restrict_compact(*master, [&](std::size_t i) { return mask[i] != 0; }));
    };
    auto k_red = color_union(0);
    auto k_blue = color_union(1);
    require(!k_red->empty() && !k_blue->empty(), "demo_graph: a color class is empty");

    auto cores_of = [&](int color) {
        DiscretizedCompact cores;
        cores.h = h;
        std::vector<std::size_t> shorties;  // elements with empty cores
        for (std::size_t e = 0; e < cover.elements.size(); ++e) {
            if (coloring.colors[int(e)] != color) continue;
            bool any = false;
            for (std::size_t i : cover.elements[e])
                if (overlap_hash.nearest_distance(master->pos(i)) >= gc.r_core * h) {
                    cores.samples.push_back(master->samples[i]);
                    any = true;
                }
            if (!any) shorties.push_back(e);
        }
        finalize_compact(cores);
        return std::make_pair(cores, shorties);
    };
    auto [red_cores, red_short] = cores_of(0);
    auto [blue_cores, blue_short] = cores_of(1);

    // Initial chart reps of the lifted section (f(z), z), chart 1 canonical.
    ChartZones zones;
    zones.k1 = k_red;
    zones.k2 = k_blue;
    zones.rep1 = SectionChart::from_scalar(SampledMap::from_function(k_red, cfg.input.f));
    zones.rep2 =
        SectionChart::from_scalar(SampledMap::from_function(k_blue, cfg.input.f)).pushed(f12);

    RunReport& rep = out.report;
    OracleSpec oracle;
    oracle.mode = OracleMode::blend_local;
    oracle.blend_r_in = gc.blend_in * h;
    oracle.blend_r_out = gc.blend_out * h;
    oracle.fit_collar = gc.fit_collar * h;
    PatchOptions popt;
    popt.seed = cfg.seed;

    auto run_pass = [&](const char* name, const SectionChart& t_a, const SectionChart& t_b,
                        const TransitionMap& f_ab, const DiscretizedCompact& B) {
        detail::StageTimer timer;
        OracleSpec os = oracle;
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

    // ---- pass 1: holomorphy around the red cores; pair (blue, red) ----
    {
        auto B1 = red_cores.empty() ? DiscretizedCompact{}
                                    : inflate_compact(red_cores, gc.r_b * h);
        if (B1.h == 0.0) B1.h = h;
        auto res = run_pass("B1", zones.rep2, zones.rep1, f21, B1);
        zones.rep2 = res.out_a;
        zones.rep1 = res.out_b;
        zones.k1 = res.kb_ext;
    }
    // ---- pass 2: holomorphy around the blue cores; pair (red+B1, blue) ----
    {
        auto B2 = blue_cores.empty() ? DiscretizedCompact{}
                                     : inflate_compact(blue_cores, gc.r_b * h);
        if (B2.h == 0.0) B2.h = h;
        auto res = run_pass("B2", zones.rep1, zones.rep2, f12, B2);
        zones.rep1 = res.out_a;
        zones.rep2 = res.out_b;
        zones.k2 = res.kb_ext;
    }
    // ---- pass 3: finish around the overlaps and short pieces ----
    {
        DiscretizedCompact targets;
        targets.h = h;
        for (std::size_t i : overlap_idx) targets.samples.push_back(master->samples[i]);
        for (std::size_t e : red_short)
            for (std::size_t i : cover.elements[e]) targets.samples.push_back(master->samples[i]);
        for (std::size_t e : blue_short)
            for (std::size_t i : cover.elements[e]) targets.samples.push_back(master->samples[i]);
        finalize_compact(targets);
        require(!targets.empty(), "demo_graph: no final-pass targets");
        SpatialHash target_hash(targets);

        auto union_all = std::make_shared<DiscretizedCompact>(union_compact(*zones.k1, *zones.k2));
        auto la = std::make_shared<DiscretizedCompact>(restrict_compact(
            *union_all,
            [&](std::size_t i) {
                return target_hash.nearest_distance(union_all->pos(i)) >= gc.l_cut * h;
            }));
        auto lb = std::make_shared<DiscretizedCompact>(restrict_compact(
            *union_all,
            [&](std::size_t i) {
                return target_hash.nearest_distance(union_all->pos(i)) <= gc.r_w * h;
            }));
        require(!la->empty() && !lb->empty(), "demo_graph: degenerate final pair");

        SectionChart rep_a = detail::chart1_on(zones, la, f21);
        SectionChart rep_b = detail::chart1_on(zones, lb, f21).pushed(f12);
        auto B3 = inflate_compact(targets, gc.r_b3 * h);
        ChartZones final_zones;
        auto res = run_pass("final", rep_a, rep_b, f12, B3);
        final_zones.k1 = la;
        final_zones.rep1 = res.out_a;
        final_zones.k2 = res.kb_ext;
        final_zones.rep2 = res.out_b;
        zones = final_zones;
    }

    // ---- assemble the chart-1 approximant on K+ ----
    out.k_plus = std::make_shared<DiscretizedCompact>(inflate_compact(*master, 4.0 * h));
    out.approximant = SampledMap(out.k_plus, 1);
    for (std::size_t i = 0; i < out.k_plus->size(); ++i) {
        cplx pos = out.k_plus->pos(i);
        int i2 = zones.k2->find_sample(pos);
        if (i2 >= 0) {
            out.approximant.at(i, 0) = f21(zones.rep2.point(std::size_t(i2)))[0];
            continue;
        }
        int i1 = zones.k1->find_sample(pos);
        require(i1 >= 0, "demo_graph: K+ sample not covered by the final zones");
        out.approximant.at(i, 0) = zones.rep1.values.at(std::size_t(i1), 0);
    }

    // ---- report ----
    rep.h = h;
    rep.epsilon = cfg.epsilon;
    rep.seed = cfg.seed;
    rep.scale = std::max(1.0, sup_norm(out.input_values));
    double sup_err = 0.0;
    for (std::size_t i = 0; i < master->size(); ++i) {
        int ip = out.k_plus->find_sample(master->pos(i));
        require(ip >= 0, "demo_graph: K sample missing from K+");
        sup_err = std::max(sup_err, std::abs(out.approximant.at(std::size_t(ip), 0) -
                                             out.projected_values.at(i, 0)));
    }
    rep.sup_error = sup_err;
    rep.projection_distance = 0.0;
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
    rep.total_time_ms = total.ms();
    require(rep.sup_error < cfg.epsilon, "demo_graph: epsilon not met");
    return out;
}

/// A3 => A2 reduction: lift f to the section (f(z), z), run the pipeline for
/// the set class, and read the first component back off the approximant.
inline PipelineOutput a3_to_a2(const PipelineConfig& cfg) {
    bool any_polyline = false, any_area = false;
    for (const auto& p : cfg.primitives) {
        if (std::holds_alternative<PolylinePrimitive>(p)) any_polyline = true;
        else any_area = true;
    }
    require(any_polyline && !any_area, "a3_to_a2: expected a one-dimensional set");
    return demo_graph(cfg);
}

}  // namespace holopatch

#endif
