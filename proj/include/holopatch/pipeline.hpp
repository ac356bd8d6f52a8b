#ifndef HOLOPATCH_PIPELINE_HPP
#define HOLOPATCH_PIPELINE_HPP

#include <chrono>

#include "holopatch/nerve.hpp"
#include "holopatch/patching.hpp"
#include "holopatch/slabs.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// End-to-end approximation pipelines at desk scale. Each demo consumes a
// PipelineConfig, runs the bumping passes for its set class, and emits a
// RunReport plus a holomorphic approximant sampled on a 4h neighborhood of K
// with a discrete Cauchy-Riemann certificate.
//
// Inputs with non-holomorphic interior data (conj(z) on a 2D set) are first
// projected to the nearest fitted member of A(K); the projection distance is
// reported separately and the approximation guarantees are measured against
// the projected section. Interpolation residuals are always measured against
// the raw input.
// ----------------------------------------------------------------------------

struct InputMap {
    std::function<cplx(cplx)> f;
    std::string name;
};

struct PipelineConfig {
    double h = 0.02;
    std::vector<SetPrimitive> primitives;
    std::vector<cplx> p_points;
    double snap_radius = 0.0;  // default: h
    double epsilon = 0.05;
    double delta = 100.0;  // phi-adapted chart radius, supplied by the caller
    std::uint64_t seed = 1;
    std::string transition = "identity";
    std::vector<cplx> transition_params;
    std::vector<cplx> transition_params_b;
    std::vector<cplx> nonsmooth_points;
    InputMap input;
    // Graph-cover tuning (units of h); zero means the built-in default.
    double cover_piece_len = 0.0;
    int cover_min_pieces = 0;
};

struct StageLog {
    std::string name;
    double glue_residual = 0.0;
    double v_norm = 0.0;
    double oracle_error = 0.0;
    int oracle_degree = 0;
    int newton_iterations = 0;
    double eta = 0.0;
    double time_ms = 0.0;
};

struct InterpResidual {
    cplx point;
    double residual = 0.0;
};

struct RunReport {
    double sup_error = 0.0;            // vs the admissible input
    double projection_distance = 0.0;  // raw input vs admissible projection
    std::vector<InterpResidual> interpolation_residuals;  // vs the raw input
    double cr_residual_max = 0.0;
    bool cr_vacuous = false;
    std::size_t cr_eligible = 0;
    std::vector<StageLog> stages;
    int total_newton_iterations = 0;
    double h = 0.0;
    double epsilon = 0.0;
    double scale = 0.0;
    std::uint64_t seed = 0;
    double total_time_ms = 0.0;
    bool global_fit_available = false;
    double global_fit_error = 0.0;
    int global_fit_degree = 0;
};

struct PipelineOutput {
    RunReport report;
    std::shared_ptr<const DiscretizedCompact> k;        // the input compact
    std::shared_ptr<const DiscretizedCompact> k_plus;   // 4h neighborhood
    SampledMap approximant;                             // chart-1 values on k_plus
    SampledMap input_values;                            // raw f on k
    SampledMap projected_values;                        // admissible f-hat on k
};

namespace detail {

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline std::vector<cplx> snap_points(const DiscretizedCompact& k, const std::vector<cplx>& pts,
                                     double snap_radius) {
    std::vector<cplx> out;
    if (pts.empty()) return out;
    SpatialHash hash(k);
    for (cplx p : pts) {
        int idx = hash.nearest_index(p);
        require(idx >= 0, "pipeline: interpolation point with empty set");
        double d = std::abs(k.pos(std::size_t(idx)) - p);
        require(d <= std::max(snap_radius, k.h * 0.75),
                "pipeline: interpolation point does not lie on the set");
        out.push_back(k.pos(std::size_t(idx)));
    }
    // Distinctness after snapping.
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            require(std::abs(out[i] - out[j]) > 1e-14, "pipeline: P points collide after snapping");
    return out;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Transition registry
// ----------------------------------------------------------------------------

inline TransitionPair make_transition(const std::string& name, const std::vector<cplx>& params,
                                      const std::vector<cplx>& params_b = {}) {
    if (name == "identity" || name.empty()) return make_identity_pair(2);
    if (name == "affine") {
        require(params.size() >= 3, "transition affine: params a, b, c required");
        return make_affine_pair(params[0], params[1], params[2]);
    }
    if (name == "shear_square") {
        require(params.size() >= 1, "transition shear_square: param s required");
        return make_shear_square_pair(params[0]);
    }
    if (name == "linear_scale") {
        require(!params.empty(), "transition linear_scale: a(z2) coefficients required");
        return make_linear_scale_pair(params, params_b);
    }
    throw std::invalid_argument("unknown transition: " + name);
}

// ----------------------------------------------------------------------------
// Admissible projection: per-component holomorphic least-squares fit with
// exact interpolation at the P points (and at any listed shared points so the
// projected section stays single-valued across tangencies).
// ----------------------------------------------------------------------------

struct AdmissibleProjection {
    SampledMap values;         // f-hat on K
    double distance = 0.0;     // sup |f - f-hat|
    bool identity = false;     // 1D sets keep the input
    std::vector<HolomorphicFit> fits;  // per component (2D only)
};

inline AdmissibleProjection project_admissible(std::shared_ptr<const DiscretizedCompact> k,
                                               const SampledMap& f,
                                               const std::vector<cplx>& p_snapped,
                                               const std::vector<cplx>& shared_points,
                                               double epsilon) {
    AdmissibleProjection out;
    bool has_interior = false;
    for (const auto& s : k->samples) has_interior = has_interior || s.is_interior;
    if (!has_interior) {
        // dim K <= 1: every continuous map is admissible.
        out.values = f;
        out.identity = true;
        return out;
    }
    out.values = SampledMap(k, 1);
    auto comps = component_index_sets(*k);
    for (const auto& idx : comps) {
        auto comp = std::make_shared<DiscretizedCompact>(restrict_compact(*k, [&](std::size_t i) {
            return std::binary_search(idx.begin(), idx.end(), i);
        }));
        FitRequest req;
        for (std::size_t i : idx) {
            req.points.push_back(k->pos(i));
            req.values.push_back(f.at(i, 0));
        }
        for (cplx p : p_snapped)
            if (comp->has_sample(p)) {
                req.constraint_pts.push_back(p);
                req.constraint_vals.push_back(f.at(std::size_t(k->find_sample(p)), 0));
            }
        for (cplx p : shared_points) {
            bool close = false;
            SpatialHash ch(*comp);
            if (ch.nearest_distance(p) <= 2.0 * k->h) close = true;
            if (!close) continue;
            bool dup = false;
            for (cplx q : req.constraint_pts) dup = dup || std::abs(p - q) < 1e-12;
            if (!dup) {
                int ip = k->find_sample(p);
                require(ip >= 0, "projection: shared point is not a sample");
                req.constraint_pts.push_back(p);
                req.constraint_vals.push_back(f.at(std::size_t(ip), 0));
            }
        }
        req.poles = complement_hole_centers(*comp);
        // Escalate until the error stalls; any admissible representative works,
        // closer is better.
        auto r = fit_holomorphic_escalating(req, std::max(epsilon / 50.0, 1e-10), 24);
        out.fits.push_back(r.fit);
        for (std::size_t i : idx) out.values.at(i, 0) = r.fit.eval(k->pos(i));
    }
    SampledMap diff = f;
    diff -= out.values;
    out.distance = sup_norm(diff);
    return out;
}

// ----------------------------------------------------------------------------
// Zero-dimensional sets: per-component constant / escalating fit.
// ----------------------------------------------------------------------------

inline PipelineOutput demo_zero_dim(const PipelineConfig& cfg) {
    detail::StageTimer total;
    PipelineOutput out;
    auto k = std::make_shared<DiscretizedCompact>(build_compact(cfg.primitives, cfg.h));
    require(!k->empty(), "demo_zero_dim: empty set");
    out.k = k;
    out.input_values = SampledMap::from_function(k, cfg.input.f);
    auto p_snapped = detail::snap_points(*k, cfg.p_points,
                                         cfg.snap_radius > 0 ? cfg.snap_radius : cfg.h);

    // Components must be separated by at least 4h.
    auto comps = component_index_sets(*k);
    for (std::size_t a = 0; a < comps.size(); ++a)
        for (std::size_t b = a + 1; b < comps.size(); ++b) {
            double dmin = 1e300;
            for (std::size_t i : comps[a])
                for (std::size_t j : comps[b])
                    dmin = std::min(dmin, std::abs(k->pos(i) - k->pos(j)));
            require(dmin >= 4.0 * cfg.h, "demo_zero_dim: components closer than 4h");
        }

    out.k_plus = std::make_shared<DiscretizedCompact>(inflate_compact(*k, 4.0 * cfg.h));
    out.approximant = SampledMap(out.k_plus, 1);
    out.projected_values = SampledMap(k, 1);

    double sup_error = 0.0;
    int max_degree = 0;
    detail::StageTimer stage;
    SpatialHash kp_hash(*out.k_plus);
    for (const auto& idx : comps) {
        FitRequest req;
        for (std::size_t i : idx) {
            req.points.push_back(k->pos(i));
            req.values.push_back(out.input_values.at(i, 0));
        }
        for (cplx p : p_snapped) {
            bool mine = false;
            for (std::size_t i : idx) mine = mine || k->pos(i) == p;
            if (!mine) continue;
            req.constraint_pts.push_back(p);
            req.constraint_vals.push_back(out.input_values.at(std::size_t(k->find_sample(p)), 0));
        }
        auto r = fit_holomorphic_escalating(req, cfg.epsilon * 0.5, 24);
        require(r.met_target, "demo_zero_dim: per-component fit missed epsilon");
        max_degree = std::max(max_degree, r.fit.degree);
        sup_error = std::max(sup_error, r.achieved);
        for (std::size_t i : idx) out.projected_values.at(i, 0) = r.fit.eval(k->pos(i));
        // Paint the approximant on k_plus samples nearest to this component.
        std::vector<Sample> comp_samples;
        for (std::size_t i : idx) comp_samples.push_back(k->samples[i]);
        SpatialHash comp_hash(comp_samples, 2.0 * cfg.h);
        for (std::size_t i = 0; i < out.k_plus->size(); ++i)
            if (comp_hash.nearest_distance(out.k_plus->pos(i)) <= 4.0 * cfg.h + 1e-12)
                out.approximant.at(i, 0) = r.fit.eval(out.k_plus->pos(i));
    }

    RunReport& rep = out.report;
    rep.h = cfg.h;
    rep.epsilon = cfg.epsilon;
    rep.seed = cfg.seed;
    rep.sup_error = sup_error;
    rep.projection_distance = 0.0;
    rep.scale = std::max(1.0, sup_norm(out.input_values));
    for (cplx p : p_snapped) {
        int ik = k->find_sample(p);
        int ip = out.k_plus->find_sample(p);
        require(ik >= 0 && ip >= 0, "demo_zero_dim: P point missing from the output grid");
        rep.interpolation_residuals.push_back(
            {p, std::abs(out.approximant.at(std::size_t(ip), 0) -
                         out.input_values.at(std::size_t(ik), 0))});
    }
    auto cr = cr_residual(out.approximant);
    rep.cr_residual_max = cr.max;
    rep.cr_vacuous = cr.vacuous;
    rep.cr_eligible = cr.eligible;
    StageLog log;
    log.name = "fit";
    log.oracle_degree = max_degree;
    log.oracle_error = sup_error;
    log.time_ms = stage.ms();
    rep.stages.push_back(log);
    rep.total_time_ms = total.ms();
    require(rep.sup_error < cfg.epsilon, "demo_zero_dim: epsilon not met");
    return out;
}

}  // namespace holopatch

#include "holopatch/pipeline_graph.hpp"
#include "holopatch/pipeline_domain.hpp"

#endif
