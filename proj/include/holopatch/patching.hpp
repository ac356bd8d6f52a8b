#ifndef HOLOPATCH_PATCHING_HPP
#define HOLOPATCH_PATCHING_HPP

#include "holopatch/newton.hpp"
#include "holopatch/polyfit.hpp"
#include "holopatch/transition.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// The nonlinear Cousin step: glue sections u1 (chart a, on K1) and u2 (chart b,
// on K2) across a good pair, where chart b = F(chart a) on the overlap. The
// derivative of
//     Phi(w1, w2) = pi [ (u2 + w2) - F(u1 + w1) ]   on K12
// at the base point has the right inverse
//     S(g) = ( -gamma1^-1 T1(gamma2^-1 j(g)),  gamma2 T2(gamma2^-1 j(g)) ),
// built from the Cartan factors of gamma = F'(u1). Both components vanish at P
// and have zero last coordinate, so Newton iterates stay sections.
// ----------------------------------------------------------------------------

/// A pair of corrections (w1 on K1, w2 on K2), each C^{n-1}-valued.
struct PatchVec {
    SampledMap w1, w2;

    PatchVec() = default;
    PatchVec(SampledMap a, SampledMap b) : w1(std::move(a)), w2(std::move(b)) {}

    friend PatchVec operator+(const PatchVec& a, const PatchVec& b) {
        return {a.w1 + b.w1, a.w2 + b.w2};
    }
    friend PatchVec operator-(const PatchVec& a, const PatchVec& b) {
        return {a.w1 - b.w1, a.w2 - b.w2};
    }
};

inline double patch_norm(const PatchVec& v) {
    double n1 = v.w1.size() ? sup_norm(v.w1) : 0.0;
    double n2 = v.w2.size() ? sup_norm(v.w2) : 0.0;
    return std::max(n1, n2);
}

/// The right-inverse operator S. Holds a Cartan split of gamma = F'(u1) and a
/// P-aware additive splitter; g must be C^{n-1}-valued on K12.
class RhsInverse {
public:
    RhsInverse(std::shared_ptr<const GoodPairContext> ctx, GroupMapSample gamma1,
               GroupMapSample gamma2, std::vector<cplx> p_points)
        : ctx_(std::move(ctx)),
          gamma1_(std::move(gamma1)),
          gamma2_(std::move(gamma2)),
          splitter_(ctx_, std::move(p_points)) {
        n_ = gamma1_.n;
        const auto& k12 = *ctx_->k12;
        inv2_on_k12_.reserve(k12.size());
        g1_on_k12_.reserve(k12.size());
        for (std::size_t i = 0; i < k12.size(); ++i) {
            int i2 = gamma2_.domain->find_sample(k12.pos(i));
            int i1 = gamma1_.domain->find_sample(k12.pos(i));
            require(i1 >= 0 && i2 >= 0, "RhsInverse: factor domains miss K12 samples");
            inv2_on_k12_.push_back(block::inverse(gamma2_.matrices[i2]));
            g1_on_k12_.push_back(gamma1_.matrices[i1]);
        }
        inv1_.reserve(gamma1_.matrices.size());
        for (const auto& m : gamma1_.matrices) inv1_.push_back(block::inverse(m));
    }

    int n() const { return n_; }
    const GroupMapSample& gamma1() const { return gamma1_; }
    const GroupMapSample& gamma2() const { return gamma2_; }
    const GoodPairContext& ctx() const { return *ctx_; }

    /// S(g): returns (v1 on K1, v2 on K2), C^{n-1}-valued maps.
    PatchVec apply(const SampledMap& g) const {
        const auto& c = *ctx_;
        int d = n_ - 1;
        require(g.codim() == d && g.size() == c.k12->size(), "S: g must be C^{n-1} on K12");
        // gamma2^-1 j(g): last coordinate of j(g) is 0, so only the A-block acts.
        SampledMap w(c.k12, d);
        for (std::size_t i = 0; i < w.size(); ++i)
            for (int r = 0; r < d; ++r) {
                cplx s{0, 0};
                for (int k = 0; k < d; ++k) s += inv2_on_k12_[i].A(r, k) * g.at(i, k);
                w.at(i, r) = s;
            }
        auto [t1, t2] = splitter_.split_vector(w, /*check_vanishing=*/false);
        // v1 = -gamma1^-1 t1 on K1; v2 = gamma2 t2 on K2 (A-blocks only).
        SampledMap v1(c.k1, d), v2(c.k2, d);
        for (std::size_t i = 0; i < v1.size(); ++i)
            for (int r = 0; r < d; ++r) {
                cplx s{0, 0};
                for (int k = 0; k < d; ++k) s += inv1_[i].A(r, k) * t1.at(i, k);
                v1.at(i, r) = -s;
            }
        for (std::size_t i = 0; i < v2.size(); ++i)
            for (int r = 0; r < d; ++r) {
                cplx s{0, 0};
                for (int k = 0; k < d; ++k) s += gamma2_.matrices[i].A(r, k) * t2.at(i, k);
                v2.at(i, r) = s;
            }
        return {std::move(v1), std::move(v2)};
    }

    /// Frozen derivative  Phi'(u1,*)(v1, v2) = pi [ v2 - gamma v1 ]  on K12,
    /// with gamma = gamma2 gamma1 as factored.
    SampledMap derivative_apply(const PatchVec& v) const {
        const auto& c = *ctx_;
        int d = n_ - 1;
        SampledMap out(c.k12, d);
        for (std::size_t i = 0; i < out.size(); ++i) {
            cplx z = c.k12->pos(i);
            int i1 = c.k1->find_sample(z);
            int i2 = c.k2->find_sample(z);
            auto gamma = block::mul(block::inverse(inv2_on_k12_[i]), g1_on_k12_[i]);
            for (int r = 0; r < d; ++r) {
                cplx s{0, 0};
                for (int k = 0; k < d; ++k) s += gamma.A(r, k) * v.w1.at(i1, k);
                out.at(i, r) = v.w2.at(i2, r) - s;
            }
        }
        return out;
    }

    /// Probed operator norm over random unit g and right-inverse defect over
    /// random probes; both deterministic for a fixed seed.
    struct ProbeReport {
        double norm_estimate = 0.0;
        double right_inverse_defect = 0.0;
    };

    ProbeReport probe(Rng& rng, int norm_probes = 50, int inverse_probes = 20,
                      double tol_defect = 1e-6) {
        ProbeReport rep;
        const auto& c = *ctx_;
        int d = n_ - 1;
        for (int t = 0; t < norm_probes + inverse_probes; ++t) {
            SampledMap g(c.k12, d);
            // Random holomorphic data vanishing at P, unit norm.
            std::vector<cplx> coeff(5);
            for (auto& v : coeff) v = rng.unit_disk();
            cplx center{0, 0};
            double radius = 1e-9;
            for (std::size_t i = 0; i < c.k12->size(); ++i) center += c.k12->pos(i);
            center /= double(c.k12->size());
            for (std::size_t i = 0; i < c.k12->size(); ++i)
                radius = std::max(radius, std::abs(c.k12->pos(i) - center));
            for (std::size_t i = 0; i < c.k12->size(); ++i) {
                cplx u = (c.k12->pos(i) - center) / radius;
                cplx acc{0, 0}, m{1, 0};
                for (cplx v : coeff) {
                    acc += v * m;
                    m *= u;
                }
                cplx wfac{1, 0};
                for (cplx p : splitter_.p_points()) wfac *= (c.k12->pos(i) - p) / radius;
                for (int r = 0; r < d; ++r) g.at(i, r) = acc * wfac * (r == 0 ? 1.0 : 0.3);
            }
            double ng = sup_norm(g);
            if (ng == 0.0) continue;
            g *= cplx{1.0 / ng, 0.0};
            auto v = apply(g);
            if (t < norm_probes) {
                rep.norm_estimate = std::max(rep.norm_estimate, patch_norm(v));
            } else {
                auto back = derivative_apply(v);
                double defect = 0.0;
                for (std::size_t i = 0; i < back.size(); ++i)
                    for (int r = 0; r < d; ++r)
                        defect = std::max(defect, std::abs(back.at(i, r) - g.at(i, r)));
                rep.right_inverse_defect = std::max(rep.right_inverse_defect, defect);
            }
        }
        require(rep.right_inverse_defect <= tol_defect,
                "RhsInverse: right-inverse probe failed (bad Cartan factors or too-coarse h)");
        probed_ = rep;
        has_probe_ = true;
        return rep;
    }

    /// Probed operator norm; probe() must have run.
    double norm_estimate() const {
        require(has_probe_, "RhsInverse: probe() has not run");
        return probed_.norm_estimate;
    }
    const ProbeReport& probe_report() const {
        require(has_probe_, "RhsInverse: probe() has not run");
        return probed_;
    }

private:
    std::shared_ptr<const GoodPairContext> ctx_;
    GroupMapSample gamma1_, gamma2_;
    AdditiveSplitter splitter_;
    std::vector<AffineBlockMatrix> inv2_on_k12_, g1_on_k12_, inv1_;
    int n_ = 2;
    ProbeReport probed_;
    bool has_probe_ = false;
};

/// Factor gamma = F'(u1) over the pair and wrap the right inverse. When gamma
/// is far from the identity, the contraction continuation evaluates gamma at
/// contracted points through the nearest u1 sample; the final sweep is still
/// against the exact sampled gamma.
inline RhsInverse build_rhs_inverse(const SectionChart& u1, const TransitionMap& f,
                                    std::shared_ptr<const GoodPairContext> ctx,
                                    const std::vector<cplx>& p_points,
                                    const CartanOptions& copt = {}) {
    const auto& k12 = *ctx->k12;
    GroupMapSample gamma;
    gamma.domain = ctx->k12;
    gamma.n = f.n;
    gamma.matrices.reserve(k12.size());
    for (std::size_t i = 0; i < k12.size(); ++i) {
        int j = u1.domain().find_sample(k12.pos(i));
        require(j >= 0, "build_rhs_inverse: u1 does not cover K12");
        gamma.matrices.push_back(f.jacobian(u1.point(j)));
    }
    auto u1_hash = std::make_shared<SpatialHash>(u1.domain());
    auto u1_copy = std::make_shared<SectionChart>(u1);
    auto evaluator = [u1_hash, u1_copy, &f](cplx z) {
        int j = u1_hash->nearest_index(z);
        require(j >= 0, "gamma evaluator: empty u1 domain");
        return f.jacobian(u1_copy->point(std::size_t(j)));
    };
    auto split = split_multiplicative(gamma, ctx, copt, evaluator);
    return RhsInverse(ctx, std::move(split.gamma1), std::move(split.gamma2), p_points);
}

// ----------------------------------------------------------------------------
// patch_sections
// ----------------------------------------------------------------------------

struct PatchOptions {
    double tol_glue_factor = 1e-9;   // tol = factor * (1 + scale) + floor
    double tol_glue_floor = 1e-12;
    int max_newton_iters = 24;
    DerivativeMode mode = DerivativeMode::frozen_at_center;
    unsigned long long seed = 1234;
    double probe_radius = 1.0;       // Lipschitz probe radius around u1(K12)
};

struct PatchResult {
    SectionChart v1;  // correction on K1 (full n components, last = 0)
    SectionChart v2;  // correction on K2
    double glue_residual = 0.0;
    double delta = 0.0;          // computed admissible input-mismatch bound
    double s_norm_estimate = 0.0;
    double theta = 0.0;
    int newton_iterations = 0;
    std::vector<double> residual_log;
    bool guaranteed = false;
};

namespace detail {

/// Probed Lipschitz constant of the Jacobian near the range of u1 on K12.
inline double jacobian_lipschitz(const SectionChart& u1, const TransitionMap& f,
                                 const DiscretizedCompact& k12, double radius, Rng& rng) {
    double lip = 0.0;
    int d = f.n - 1;
    for (std::size_t i = 0; i < k12.size(); i += std::max<std::size_t>(1, k12.size() / 24)) {
        int j = u1.domain().find_sample(k12.pos(i));
        if (j < 0) continue;
        auto base = u1.point(std::size_t(j));
        for (int t = 0; t < 4; ++t) {
            auto x = base, y = base;
            for (int c = 0; c < d; ++c) {
                x[c] += radius * rng.unit_disk();
                y[c] += radius * rng.unit_disk();
            }
            double dist = 0.0;
            for (int c = 0; c < d; ++c) dist = std::max(dist, std::abs(x[c] - y[c]));
            if (dist < 1e-12) continue;
            auto jx = f.jacobian(x), jy = f.jacobian(y);
            double dj = 0.0;
            for (std::size_t k = 0; k < jx.a.size(); ++k) dj += std::norm(jx.a[k] - jy.a[k]);
            for (std::size_t k = 0; k < jx.b.size(); ++k) dj += std::norm(jx.b[k] - jy.b[k]);
            lip = std::max(lip, std::sqrt(dj) / dist);
        }
    }
    return lip;
}

}  // namespace detail

/// Body of patch_sections with a caller-supplied right inverse (reused by
/// glue_good_pair, which needs delta before building the oracle).
inline PatchResult patch_sections_with(const RhsInverse& S, const SectionChart& u1,
                                       const SectionChart& u2, const TransitionMap& f,
                                       std::shared_ptr<const GoodPairContext> ctx,
                                       const std::vector<cplx>& p_points, double epsilon,
                                       const PatchOptions& opt = {}) {
    require(epsilon > 0.0, "patch_sections: epsilon must be > 0");
    u1.check_invariant();
    u2.check_invariant();
    const auto& c = *ctx;
    const int n = f.n;
    const int d = n - 1;
    Rng rng(opt.seed);
    double s_norm = std::max(S.norm_estimate(), 1e-6);

    // theta: radius on which the probed Jacobian Lipschitz constant keeps
    // |Phi'(w1) - Phi'(u1)| below 1/(8|S|).
    double lip = detail::jacobian_lipschitz(u1, f, *c.k12, opt.probe_radius, rng);
    double theta = lip < 1e-12 ? opt.probe_radius
                               : std::min(opt.probe_radius, 1.0 / (8.0 * s_norm * lip));
    double delta = std::min(theta, epsilon) / (8.0 * 2.0 * s_norm);

    // Input mismatch on K12 (P-matching is part of it).
    double mismatch = 0.0;
    SampledMap rhs0(c.k12, d);
    for (std::size_t i = 0; i < c.k12->size(); ++i) {
        cplx z = c.k12->pos(i);
        int i1 = u1.domain().find_sample(z);
        int i2 = u2.domain().find_sample(z);
        require(i1 >= 0 && i2 >= 0, "patch_sections: charts do not cover K12");
        auto fu1 = f(u1.point(std::size_t(i1)));
        for (int r = 0; r < d; ++r) {
            cplx dv = u2.values.at(std::size_t(i2), r) - fu1[r];
            rhs0.at(i, r) = dv;
            mismatch = std::max(mismatch, std::abs(dv));
        }
    }
    require(mismatch < delta,
            "patch_sections: |u2 - F(u1)| on K12 is not below the computed delta");
    for (cplx p : p_points) {
        int i = c.k12->find_sample(p);
        if (i < 0) continue;
        for (int r = 0; r < d; ++r)
            require(std::abs(rhs0.at(std::size_t(i), r)) <= 1e-10 * (1.0 + mismatch),
                    "patch_sections: u2(p) != F(u1(p)) at a P point of the overlap");
    }

    // Newton problem on pairs (w1, w2); Phi(w) = pi[(u2+w2) - F(u1+w1)] on K12.
    double scale = 1.0;
    for (std::size_t i = 0; i < c.k12->size(); ++i) {
        int i2 = u2.domain().find_sample(c.k12->pos(i));
        for (int r = 0; r < d; ++r) scale = std::max(scale, std::abs(u2.values.at(i2, r)));
    }
    double tol = opt.tol_glue_factor * scale + opt.tol_glue_floor;

    auto phi = [&](const PatchVec& w) {
        SampledMap out(c.k12, d);
        for (std::size_t i = 0; i < c.k12->size(); ++i) {
            cplx z = c.k12->pos(i);
            int i1 = u1.domain().find_sample(z);
            int i2 = u2.domain().find_sample(z);
            int w1i = w.w1.domain().find_sample(z);
            int w2i = w.w2.domain().find_sample(z);
            auto pt = u1.point(std::size_t(i1));
            for (int r = 0; r < d; ++r) pt[r] += w.w1.at(std::size_t(w1i), r);
            auto fu = f(pt);
            for (int r = 0; r < d; ++r)
                out.at(i, r) =
                    (u2.values.at(std::size_t(i2), r) + w.w2.at(std::size_t(w2i), r)) - fu[r];
        }
        return out;
    };

    OperatorProblem<PatchVec, SampledMap> prob;
    prob.center = PatchVec(SampledMap(c.k1, d), SampledMap(c.k2, d));
    prob.radius = epsilon;
    prob.bound_c = 2.0 * s_norm;
    prob.norm_e = [](const PatchVec& v) { return patch_norm(v); };
    prob.norm_f = [](const SampledMap& m) { return sup_norm(m); };
    prob.add_e = [](const PatchVec& a, const PatchVec& b) { return a + b; };
    prob.subtract_f = [](const SampledMap& a, const SampledMap& b) { return a - b; };
    prob.evaluate = phi;
    prob.derivative_solve = [&](const PatchVec& base, const SampledMap& rhs) {
        if (opt.mode == DerivativeMode::newton && patch_norm(base) > 0.0) {
            SectionChart u1w = u1;
            for (std::size_t i = 0; i < u1w.values.size(); ++i)
                for (int r = 0; r < d; ++r) u1w.values.at(i, r) += base.w1.at(i, r);
            RhsInverse S_here = build_rhs_inverse(u1w, f, ctx, p_points);
            return S_here.apply(rhs);
        }
        return S.apply(rhs);
    };

    SampledMap zero_target(c.k12, d);
    auto solve = solve_surjective(prob, zero_target, tol, opt.max_newton_iters, opt.mode);
    require(solve.converged, "patch_sections: Newton did not reach the gluing tolerance");
    PatchVec w = solve.solution;
    require(patch_norm(w) <= epsilon, "patch_sections: corrections exceeded epsilon");

    PatchResult out;
    out.residual_log = solve.residual_log;
    out.newton_iterations = solve.iterations;
    out.guaranteed = solve.guaranteed;
    out.delta = delta;
    out.s_norm_estimate = s_norm;
    out.theta = theta;
    double res_norm = solve.residual_log.back();

    // Package as full-section corrections with zero last coordinate.
    auto widen = [&](const SampledMap& m, std::shared_ptr<const DiscretizedCompact> dom) {
        SectionChart s;
        s.values = SampledMap(dom, n);
        for (std::size_t i = 0; i < m.size(); ++i) {
            for (int r = 0; r < d; ++r) s.values.at(i, r) = m.at(i, r);
            s.values.at(i, d) = 0.0;
        }
        return s;
    };
    out.v1 = widen(w.w1, c.k1);
    out.v2 = widen(w.w2, c.k2);
    out.glue_residual = res_norm;
    return out;
}

/// Solve u2 + v2 = F(u1 + v1) on K12 with |v_j| <= epsilon and v_j(P) = 0.
inline PatchResult patch_sections(const SectionChart& u1, const SectionChart& u2,
                                  const TransitionMap& f,
                                  std::shared_ptr<const GoodPairContext> ctx,
                                  const std::vector<cplx>& p_points, double epsilon,
                                  const PatchOptions& opt = {}) {
    RhsInverse S = build_rhs_inverse(u1, f, ctx, p_points);
    Rng rng(opt.seed ^ 0x5bd1e995u);
    S.probe(rng);
    return patch_sections_with(S, u1, u2, f, std::move(ctx), p_points, epsilon, opt);
}

// ----------------------------------------------------------------------------
// glue_good_pair: one bumping pass of the good-pair approximation theorem.
// The oracle extends the K_b chart data to K_b u B as a member of A(K_b u B):
// holomorphic local fits on the B components, blended into the data across a
// collar, exact past the blend (so the overlap mismatch stays at rounding
// level); or a single global fit when the complement of K_b u B is connected.
// ----------------------------------------------------------------------------

enum class OracleMode { blend_local, global_fit };

struct OracleSpec {
    OracleMode mode = OracleMode::blend_local;
    double blend_r_in = 0.0;    // pure-fit zone: within this of the B component
    double blend_r_out = 0.0;   // data past this distance stays untouched
    double fit_collar = 0.0;    // fit-sample collection radius around B
    double target = 0.0;        // sup-error budget on the oracle zone (0: eta/2)
    int max_degree = 40;
};

struct GlueResult {
    SectionChart out_a;  // on K_a
    SectionChart out_b;  // on K_b u B
    std::shared_ptr<const DiscretizedCompact> kb_ext;
    std::shared_ptr<const GoodPairContext> ctx;  // of (K_a, K_b u B)
    double glue_residual = 0.0;
    double oracle_error = 0.0;  // max |u2 - t_b| over K_b samples
    int oracle_degree = 0;
    double v_norm = 0.0;
    double delta = 0.0;
    double s_norm = 0.0;
    int newton_iterations = 0;
    int cartan_iterations = 0;
};

inline GlueResult glue_good_pair(const SectionChart& t_a, const SectionChart& t_b,
                                 const TransitionMap& f_ab, const std::vector<cplx>& p_points,
                                 const DiscretizedCompact& b_compact, double eta,
                                 const OracleSpec& oracle_in, const PatchOptions& popt = {}) {
    require(eta > 0.0, "glue_good_pair: eta must be > 0");
    const double h = t_a.domain().h;
    auto k_a = t_a.values.domain_ptr();
    auto k_b = t_b.values.domain_ptr();

    // B must stay clear of K_a.
    if (!b_compact.empty()) {
        SpatialHash ha(*k_a);
        for (const auto& s : b_compact.samples)
            require(ha.nearest_distance(s.pos) > 2.0 * h, "glue_good_pair: B meets K_a");
    }

    auto kb_ext = std::make_shared<DiscretizedCompact>(union_compact(*k_b, b_compact));
    auto ctx = std::make_shared<GoodPairContext>(validate_good_pair(k_a, kb_ext));
    const int n = f_ab.n;
    const int d = n - 1;

    // Right inverse and delta come first; the global oracle needs delta.
    RhsInverse S = build_rhs_inverse(t_a, f_ab, ctx, p_points);
    Rng rng(popt.seed ^ 0x9e3779b9u);
    S.probe(rng);
    double s_norm = std::max(S.norm_estimate(), 1e-6);
    double lip = detail::jacobian_lipschitz(t_a, f_ab, *ctx->k12, popt.probe_radius, rng);
    double epsilon_patch = eta / 2.0;
    double theta = lip < 1e-12 ? popt.probe_radius
                               : std::min(popt.probe_radius, 1.0 / (8.0 * s_norm * lip));
    double delta = std::min(theta, epsilon_patch) / (16.0 * s_norm);

    OracleSpec oracle = oracle_in;
    if (oracle.blend_r_out <= 0.0) oracle.blend_r_out = 4.0 * h;
    if (oracle.blend_r_in <= 0.0) oracle.blend_r_in = oracle.blend_r_out / 2.0;
    if (oracle.fit_collar <= 0.0) oracle.fit_collar = 1.6 * oracle.blend_r_out + 6.0 * h;
    double target = oracle.target > 0.0 ? oracle.target : eta / 2.0;
    if (oracle.mode == OracleMode::global_fit) target = std::min(target, delta / 2.0);

    // ---- oracle: u2 on K_b u B ----
    SectionChart u2;
    u2.values = SampledMap(kb_ext, n);
    for (std::size_t i = 0; i < kb_ext->size(); ++i)
        u2.values.at(i, d) = kb_ext->pos(i);

    double oracle_error = 0.0;
    int oracle_degree = 0;

    auto p_in = [&](cplx z, double r, const SpatialHash& hash) {
        return hash.nearest_distance(z) <= r;
    };
    (void)p_in;

    if (oracle.mode == OracleMode::global_fit) {
        require(complement_connected(*kb_ext),
                "glue oracle: global fit needs a connected complement");
        for (int r = 0; r < d; ++r) {
            FitRequest req;
            for (std::size_t i = 0; i < k_b->size(); ++i) {
                req.points.push_back(k_b->pos(i));
                req.values.push_back(t_b.values.at(i, r));
            }
            for (cplx p : p_points) {
                int ip = k_b->find_sample(p);
                if (ip < 0) continue;
                req.constraint_pts.push_back(p);
                req.constraint_vals.push_back(t_b.values.at(std::size_t(ip), r));
            }
            auto fit = fit_holomorphic_escalating(req, target, oracle.max_degree);
            if (!fit.met_target)
                throw std::runtime_error("glue oracle: global fit missed the delta/2 target");
            oracle_degree = std::max(oracle_degree, fit.fit.degree);
            oracle_error = std::max(oracle_error, fit.achieved);
            for (std::size_t i = 0; i < kb_ext->size(); ++i)
                u2.values.at(i, r) = fit.fit.eval(kb_ext->pos(i));
        }
    } else {
        // Blend-local: one fit per component of B.
        for (std::size_t i = 0; i < kb_ext->size(); ++i) {
            int ib = k_b->find_sample(kb_ext->pos(i));
            if (ib >= 0)
                for (int r = 0; r < d; ++r) u2.values.at(i, r) = t_b.values.at(std::size_t(ib), r);
        }
        auto b_comps = component_index_sets(b_compact);
        for (const auto& comp_idx : b_comps) {
            std::vector<Sample> comp_samples;
            for (std::size_t i : comp_idx) comp_samples.push_back(b_compact.samples[i]);
            SpatialHash comp_hash(comp_samples, 2.0 * h);

            // Fit data: t_b samples within the collar of this component.
            std::vector<std::size_t> fit_idx;
            for (std::size_t i = 0; i < k_b->size(); ++i)
                if (comp_hash.nearest_distance(k_b->pos(i)) <= oracle.fit_collar)
                    fit_idx.push_back(i);
            require(fit_idx.size() >= 8, "glue oracle: too few samples near a B component");

            for (int r = 0; r < d; ++r) {
                FitRequest req;
                for (std::size_t i : fit_idx) {
                    req.points.push_back(k_b->pos(i));
                    req.values.push_back(t_b.values.at(i, r));
                }
                for (cplx p : p_points) {
                    int ip = k_b->find_sample(p);
                    if (ip < 0) continue;
                    if (comp_hash.nearest_distance(p) > oracle.blend_r_out + 2.0 * h) continue;
                    req.constraint_pts.push_back(p);
                    req.constraint_vals.push_back(t_b.values.at(std::size_t(ip), r));
                }
                // Escalate until the error over the blend zone meets the target.
                HolomorphicFit best;
                double best_err = std::numeric_limits<double>::infinity();
                for (int deg = 2; deg <= oracle.max_degree; deg += (deg < 12 ? 2 : 4)) {
                    req.degree = deg;
                    auto fit = fit_holomorphic(req);
                    double err = 0.0;
                    for (std::size_t i : fit_idx) {
                        if (comp_hash.nearest_distance(k_b->pos(i)) > oracle.blend_r_out) continue;
                        err = std::max(err, std::abs(fit.eval(k_b->pos(i)) - t_b.values.at(i, r)));
                    }
                    if (err < best_err) {
                        best_err = err;
                        best = fit;
                        oracle_degree = std::max(oracle_degree, deg);
                    }
                    if (best_err <= target) break;
                }
                if (best_err > target)
                    throw std::runtime_error("glue oracle: local fit missed its accuracy target");
                oracle_error = std::max(oracle_error, best_err);

                // Write fit and blend values.
                for (std::size_t i = 0; i < kb_ext->size(); ++i) {
                    cplx z = kb_ext->pos(i);
                    double dist = comp_hash.nearest_distance(z);
                    if (dist > oracle.blend_r_out) continue;
                    cplx fit_v = best.eval(z);
                    int ib = k_b->find_sample(z);
                    if (ib < 0 || dist <= oracle.blend_r_in) {
                        u2.values.at(i, r) = fit_v;
                    } else {
                        double tblend = (oracle.blend_r_out - dist) /
                                        (oracle.blend_r_out - oracle.blend_r_in);
                        double beta = detail::smoothstep(tblend);
                        u2.values.at(i, r) =
                            t_b.values.at(std::size_t(ib), r) +
                            beta * (fit_v - t_b.values.at(std::size_t(ib), r));
                    }
                }
            }
        }
    }

    // ---- patch ----
    auto patch = patch_sections_with(S, t_a, u2, f_ab, ctx, p_points, epsilon_patch, popt);

    GlueResult out;
    out.kb_ext = kb_ext;
    out.ctx = ctx;
    out.oracle_error = oracle_error;
    out.oracle_degree = oracle_degree;
    out.glue_residual = patch.glue_residual;
    out.delta = patch.delta;
    out.s_norm = s_norm;
    out.newton_iterations = patch.newton_iterations;
    out.v_norm = std::max(patch.v1.values.size() ? sup_norm(patch.v1.values) : 0.0,
                          patch.v2.values.size() ? sup_norm(patch.v2.values) : 0.0);

    out.out_a = t_a;
    for (std::size_t i = 0; i < out.out_a.values.size(); ++i)
        for (int r = 0; r < d; ++r) out.out_a.values.at(i, r) += patch.v1.values.at(i, r);
    out.out_b = u2;
    for (std::size_t i = 0; i < out.out_b.values.size(); ++i)
        for (int r = 0; r < d; ++r) out.out_b.values.at(i, r) += patch.v2.values.at(i, r);
    return out;
}

}  // namespace holopatch

#endif
