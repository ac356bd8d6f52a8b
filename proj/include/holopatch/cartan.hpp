#ifndef HOLOPATCH_CARTAN_HPP
#define HOLOPATCH_CARTAN_HPP

#include <functional>

#include "holopatch/cousin.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// The group G of block matrices [[A, b], [0, 1]] with A in GL_{n-1} and the
// multiplicative splitting gamma = gamma2 * gamma1 over a good pair, by the
// Douady-style iteration
//     eta = log(gamma2^-1 gamma gamma1^-1),  split eta = eta1 + eta2,
//     gamma1 <- exp(eta1) gamma1,            gamma2 <- gamma2 exp(eta2).
// Everything is computed in the block representation, so the last row (0, 1)
// holds exactly by construction.
// ----------------------------------------------------------------------------

/// Matrix of the form [[A, b], [0, 1]]; A is (n-1)x(n-1) row-major.
struct AffineBlockMatrix {
    int n = 2;                 // full dimension
    std::vector<cplx> a;       // (n-1)^2 entries
    std::vector<cplx> b;       // (n-1) entries

    static AffineBlockMatrix identity(int n) {
        AffineBlockMatrix m;
        m.n = n;
        int d = n - 1;
        m.a.assign(std::size_t(d) * d, cplx{0, 0});
        m.b.assign(d, cplx{0, 0});
        for (int i = 0; i < d; ++i) m.a[std::size_t(i) * d + i] = 1.0;
        return m;
    }

    int dim() const { return n - 1; }
    cplx& A(int i, int j) { return a[std::size_t(i) * dim() + j]; }
    cplx A(int i, int j) const { return a[std::size_t(i) * dim() + j]; }

    /// Apply to a full vector (v_1..v_n); the last coordinate is preserved.
    std::vector<cplx> apply(const std::vector<cplx>& v) const {
        int d = dim();
        std::vector<cplx> out(n);
        for (int i = 0; i < d; ++i) {
            cplx s = b[i] * v[d];
            for (int j = 0; j < d; ++j) s += A(i, j) * v[j];
            out[i] = s;
        }
        out[d] = v[d];
        return out;
    }

    double frobenius_distance_to_identity() const {
        double s = 0.0;
        int d = dim();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                cplx e = A(i, j) - (i == j ? cplx{1, 0} : cplx{0, 0});
                s += std::norm(e);
            }
        for (int i = 0; i < d; ++i) s += std::norm(b[i]);
        return std::sqrt(s);
    }
};

/// Lie-algebra element [[L, c], [0, 0]] in the same block layout.
struct AffineBlockAlgebra {
    int n = 2;
    std::vector<cplx> l;  // (n-1)^2
    std::vector<cplx> c;  // (n-1)

    static AffineBlockAlgebra zero(int n) {
        AffineBlockAlgebra x;
        x.n = n;
        int d = n - 1;
        x.l.assign(std::size_t(d) * d, cplx{0, 0});
        x.c.assign(d, cplx{0, 0});
        return x;
    }
    int dim() const { return n - 1; }
    cplx& L(int i, int j) { return l[std::size_t(i) * dim() + j]; }
    cplx L(int i, int j) const { return l[std::size_t(i) * dim() + j]; }

    double frobenius() const {
        double s = 0.0;
        for (cplx v : l) s += std::norm(v);
        for (cplx v : c) s += std::norm(v);
        return std::sqrt(s);
    }
};

namespace block {

inline AffineBlockMatrix mul(const AffineBlockMatrix& x, const AffineBlockMatrix& y) {
    int d = x.dim();
    AffineBlockMatrix out = AffineBlockMatrix::identity(x.n);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            cplx s{0, 0};
            for (int k = 0; k < d; ++k) s += x.A(i, k) * y.A(k, j);
            out.A(i, j) = s;
        }
        cplx s = x.b[i];
        for (int k = 0; k < d; ++k) s += x.A(i, k) * y.b[k];
        out.b[i] = s;
    }
    return out;
}

/// Inverse via Gaussian elimination on the A block: [[A^-1, -A^-1 b], [0, 1]].
inline AffineBlockMatrix inverse(const AffineBlockMatrix& m) {
    int d = m.dim();
    std::vector<std::vector<cplx>> aug(d, std::vector<cplx>(2 * d + 1, cplx{0, 0}));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) aug[i][j] = m.A(i, j);
        aug[i][d + i] = 1.0;
        aug[i][2 * d] = m.b[i];
    }
    for (int c = 0; c < d; ++c) {
        int piv = c;
        for (int r = c + 1; r < d; ++r)
            if (std::abs(aug[r][c]) > std::abs(aug[piv][c])) piv = r;
        require(std::abs(aug[piv][c]) > 1e-300, "block inverse: singular A block");
        std::swap(aug[c], aug[piv]);
        cplx p = aug[c][c];
        for (int j = 0; j <= 2 * d; ++j) aug[c][j] /= p;
        for (int r = 0; r < d; ++r) {
            if (r == c) continue;
            cplx f = aug[r][c];
            if (f == cplx{0, 0}) continue;
            for (int j = 0; j <= 2 * d; ++j) aug[r][j] -= f * aug[c][j];
        }
    }
    AffineBlockMatrix out = AffineBlockMatrix::identity(m.n);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) out.A(i, j) = aug[i][d + j];
        cplx s{0, 0};
        for (int j = 0; j < d; ++j) s += aug[i][d + j] * m.b[j];
        out.b[i] = -s;
    }
    return out;
}

/// Condition estimate of the A block (Frobenius norms of A and A^-1).
inline double condition(const AffineBlockMatrix& m) {
    auto inv = inverse(m);
    double na = 0.0, ni = 0.0;
    for (cplx v : m.a) na += std::norm(v);
    for (cplx v : inv.a) ni += std::norm(v);
    return std::sqrt(na * ni);
}

// Algebra product: [[L,c],[0,0]] [[L',c'],[0,0]] = [[LL', Lc'], [0,0]].
inline AffineBlockAlgebra amul(const AffineBlockAlgebra& x, const AffineBlockAlgebra& y) {
    int d = x.dim();
    AffineBlockAlgebra out = AffineBlockAlgebra::zero(x.n);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            cplx s{0, 0};
            for (int k = 0; k < d; ++k) s += x.L(i, k) * y.L(k, j);
            out.L(i, j) = s;
        }
        cplx s{0, 0};
        for (int k = 0; k < d; ++k) s += x.L(i, k) * y.c[k];
        out.c[i] = s;
    }
    return out;
}

inline void axpy(AffineBlockAlgebra& y, cplx alpha, const AffineBlockAlgebra& x) {
    for (std::size_t i = 0; i < y.l.size(); ++i) y.l[i] += alpha * x.l[i];
    for (std::size_t i = 0; i < y.c.size(); ++i) y.c[i] += alpha * x.c[i];
}

/// log(M) by the power series in X = M - I. Converges when the spectral radius
/// of X is below 1 (in particular for any unipotent M, where the series is
/// finite); throws when the terms fail to die out.
inline AffineBlockAlgebra log(const AffineBlockMatrix& m, int depth = 0) {
    int d = m.dim();
    // Slow or divergent series: the inverse may sit closer to the identity
    // (log M = -log M^-1), which covers expanding diagonal blocks.
    double dist = m.frobenius_distance_to_identity();
    if (dist >= 0.8 && depth < 2) {
        auto minv = inverse(m);
        if (minv.frobenius_distance_to_identity() < 0.9 * dist) {
            auto l = log(minv, depth + 1);
            for (auto& v : l.l) v = -v;
            for (auto& v : l.c) v = -v;
            return l;
        }
    }
    AffineBlockAlgebra x = AffineBlockAlgebra::zero(m.n);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) x.L(i, j) = m.A(i, j) - (i == j ? cplx{1, 0} : cplx{0, 0});
    for (int i = 0; i < d; ++i) x.c[i] = m.b[i];

    AffineBlockAlgebra acc = x;
    AffineBlockAlgebra pow = x;
    double last_term = x.frobenius();
    for (int k = 2; k <= 128; ++k) {
        pow = amul(pow, x);
        double term = pow.frobenius() / k;
        axpy(acc, cplx{(k % 2 == 0 ? -1.0 : 1.0) / k, 0.0}, pow);
        if (term < 1e-17 * (1.0 + acc.frobenius())) return acc;
        last_term = term;
    }
    if (last_term > 1e-12 * (1.0 + acc.frobenius()))
        throw std::runtime_error("block log: power series did not converge");
    return acc;
}

/// exp by the power series; always converges, lands in the group exactly.
inline AffineBlockMatrix exp(const AffineBlockAlgebra& x) {
    int d = x.dim();
    AffineBlockAlgebra acc = x;   // sum_{k>=1} X^k / k!
    AffineBlockAlgebra term = x;  // X^k / k!
    for (int k = 2; k <= 96; ++k) {
        term = amul(term, x);
        for (auto& v : term.l) v /= double(k);
        for (auto& v : term.c) v /= double(k);
        axpy(acc, cplx{1.0, 0.0}, term);
        if (term.frobenius() < 1e-17 * (1.0 + acc.frobenius())) break;
    }
    AffineBlockMatrix out = AffineBlockMatrix::identity(x.n);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) out.A(i, j) = acc.L(i, j) + (i == j ? cplx{1, 0} : cplx{0, 0});
        out.b[i] = acc.c[i];
    }
    return out;
}

}  // namespace block

// ----------------------------------------------------------------------------
// Group-valued sampled maps
// ----------------------------------------------------------------------------

struct GroupMapSample {
    std::shared_ptr<const DiscretizedCompact> domain;
    std::vector<AffineBlockMatrix> matrices;
    int n = 2;

    static GroupMapSample constant(std::shared_ptr<const DiscretizedCompact> domain,
                                   const AffineBlockMatrix& m) {
        GroupMapSample g;
        g.domain = std::move(domain);
        g.n = m.n;
        g.matrices.assign(g.domain->size(), m);
        return g;
    }

    static GroupMapSample from_function(std::shared_ptr<const DiscretizedCompact> domain,
                                        const std::function<AffineBlockMatrix(cplx)>& f) {
        GroupMapSample g;
        g.domain = std::move(domain);
        g.matrices.reserve(g.domain->size());
        for (std::size_t i = 0; i < g.domain->size(); ++i)
            g.matrices.push_back(f(g.domain->pos(i)));
        g.n = g.matrices.empty() ? 2 : g.matrices.front().n;
        return g;
    }

    double sup_distance_to_identity() const {
        double s = 0.0;
        for (const auto& m : matrices) s = std::max(s, m.frobenius_distance_to_identity());
        return s;
    }
};

/// eta as a SampledMap of (n-1)*n components (L row-major, then c).
inline SampledMap algebra_to_map(const std::vector<AffineBlockAlgebra>& xs,
                                 std::shared_ptr<const DiscretizedCompact> domain) {
    int d = xs.front().dim();
    SampledMap m(std::move(domain), d * d + d);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (int j = 0; j < d * d; ++j) m.at(i, j) = xs[i].l[j];
        for (int j = 0; j < d; ++j) m.at(i, d * d + j) = xs[i].c[j];
    }
    return m;
}

inline AffineBlockAlgebra map_to_algebra(const SampledMap& m, std::size_t i, int n) {
    AffineBlockAlgebra x = AffineBlockAlgebra::zero(n);
    int d = n - 1;
    for (int j = 0; j < d * d; ++j) x.l[j] = m.at(i, j);
    for (int j = 0; j < d; ++j) x.c[j] = m.at(i, d * d + j);
    return x;
}

struct CartanSplit {
    GroupMapSample gamma1;  // on K1
    GroupMapSample gamma2;  // on K2
    std::vector<double> residual_log;
    int iterations = 0;
};

struct CartanOptions {
    int max_iters = 60;
    double tol_factor = 1e-8;  // tol = tol_factor * (1 + sup|gamma|)
    bool allow_continuation = true;
    int continuation_steps = 8;
};

namespace detail {

inline double sup_group_norm(const GroupMapSample& g) {
    double s = 0.0;
    for (const auto& m : g.matrices) {
        double f = 0.0;
        for (cplx v : m.a) f += std::norm(v);
        for (cplx v : m.b) f += std::norm(v);
        s = std::max(s, std::sqrt(f + 1.0));
    }
    return s;
}

/// One Douady sweep against fixed factors; returns sup |R - I|.
inline double residual_against(const GroupMapSample& gamma, const GroupMapSample& g1,
                               const GroupMapSample& g2, std::vector<AffineBlockMatrix>& r_out) {
    const auto& k12 = *gamma.domain;
    r_out.resize(k12.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < k12.size(); ++i) {
        int i1 = g1.domain->find_sample(k12.pos(i));
        int i2 = g2.domain->find_sample(k12.pos(i));
        require(i1 >= 0 && i2 >= 0, "cartan: K12 sample missing from a factor domain");
        auto r = block::mul(block::mul(block::inverse(g2.matrices[i2]), gamma.matrices[i]),
                            block::inverse(g1.matrices[i1]));
        worst = std::max(worst, r.frobenius_distance_to_identity());
        r_out[i] = r;
    }
    return worst;
}

}  // namespace detail

/// Core iteration from given starting factors. The splitter must be built with
/// P = {} on the same context.
inline CartanSplit split_multiplicative_from(const GroupMapSample& gamma,
                                             const AdditiveSplitter& splitter,
                                             GroupMapSample g1, GroupMapSample g2,
                                             const CartanOptions& opt) {
    const auto& ctx = splitter.ctx();
    CartanSplit out;
    out.gamma1 = std::move(g1);
    out.gamma2 = std::move(g2);
    double tol = opt.tol_factor * (1.0 + detail::sup_group_norm(gamma));
    int n = gamma.n;

    std::vector<AffineBlockMatrix> r;
    for (int it = 0; it <= opt.max_iters; ++it) {
        double res = detail::residual_against(gamma, out.gamma1, out.gamma2, r);
        out.residual_log.push_back(res);
        out.iterations = it;
        if (res <= tol) return out;
        if (it == opt.max_iters) break;
        require(res < 3.0, "cartan: residual exploded");

        std::vector<AffineBlockAlgebra> eta;
        eta.reserve(r.size());
        for (const auto& m : r) eta.push_back(block::log(m));
        SampledMap eta_map = algebra_to_map(eta, ctx.k12);
        auto [e1, e2] = splitter.split_vector(eta_map, /*check_vanishing=*/false);
        for (std::size_t i = 0; i < out.gamma1.matrices.size(); ++i)
            out.gamma1.matrices[i] =
                block::mul(block::exp(map_to_algebra(e1, i, n)), out.gamma1.matrices[i]);
        for (std::size_t i = 0; i < out.gamma2.matrices.size(); ++i)
            out.gamma2.matrices[i] =
                block::mul(out.gamma2.matrices[i], block::exp(map_to_algebra(e2, i, n)));
    }
    throw std::runtime_error("cartan: no convergence within max_iters");
}

/// Split gamma given by samples on K12. Requires sup |gamma - I| < 0.5 unless a
/// closed-form evaluator and star centers enable contraction continuation.
inline CartanSplit split_multiplicative(const GroupMapSample& gamma,
                                        std::shared_ptr<const GoodPairContext> ctx,
                                        const CartanOptions& opt = {},
                                        const std::function<AffineBlockMatrix(cplx)>& evaluator = {}) {
    AdditiveSplitter splitter(ctx, {});
    int n = gamma.n;
    auto id1 = GroupMapSample::constant(ctx->k1, AffineBlockMatrix::identity(n));
    auto id2 = GroupMapSample::constant(ctx->k2, AffineBlockMatrix::identity(n));

    double dist = gamma.sup_distance_to_identity();
    if (dist < 0.5) return split_multiplicative_from(gamma, splitter, id1, id2, opt);
    require(opt.allow_continuation && bool(evaluator),
            "cartan: gamma outside the contraction basin and no continuation path");

    // Continuation along the star contraction gamma_t(z) = gamma(c + t (z - c)).
    require(!ctx->star_centers.empty(), "cartan continuation: no star centers available");
    auto comps = component_index_sets(*ctx->k12);
    auto contracted = [&](double t) {
        GroupMapSample g;
        g.domain = ctx->k12;
        g.n = n;
        g.matrices.resize(ctx->k12->size());
        for (std::size_t c = 0; c < comps.size(); ++c)
            for (std::size_t i : comps[c]) {
                cplx z = ctx->star_centers[c] + t * (ctx->k12->pos(i) - ctx->star_centers[c]);
                g.matrices[i] = evaluator(z);
            }
        return g;
    };

    CartanSplit cur;
    cur.gamma1 = id1;
    cur.gamma2 = id2;
    // t = 0: gamma is constant on each overlap component. Both starting factors
    // take exp of a smooth inverse-distance blend of the per-component half
    // logs, so gamma2 gamma1 = gamma_0 holds on each component (the half logs
    // commute with themselves) and the factors stay continuous on K1, K2.
    {
        std::vector<AffineBlockAlgebra> half_logs;
        for (std::size_t c = 0; c < comps.size(); ++c) {
            require(!comps[c].empty(), "cartan continuation: empty component");
            auto m0 = evaluator(ctx->star_centers[c]);
            auto half = block::log(m0);
            for (auto& v : half.l) v *= 0.5;
            for (auto& v : half.c) v *= 0.5;
            half_logs.push_back(half);
        }
        auto blended = [&](cplx z) {
            AffineBlockAlgebra s = AffineBlockAlgebra::zero(n);
            double wsum = 0.0;
            for (std::size_t c = 0; c < comps.size(); ++c) {
                double d2 = std::norm(z - ctx->star_centers[c]) + 1e-6 * ctx->h() * ctx->h();
                double w = 1.0 / d2;
                block::axpy(s, cplx{w, 0.0}, half_logs[c]);
                wsum += w;
            }
            for (auto& v : s.l) v /= wsum;
            for (auto& v : s.c) v /= wsum;
            return block::exp(s);
        };
        for (std::size_t i = 0; i < cur.gamma1.matrices.size(); ++i)
            cur.gamma1.matrices[i] = blended(ctx->k1->pos(i));
        for (std::size_t i = 0; i < cur.gamma2.matrices.size(); ++i)
            cur.gamma2.matrices[i] = blended(ctx->k2->pos(i));
    }
    int steps = std::max(2, opt.continuation_steps);
    CartanOptions step_opt = opt;
    for (int s = 1; s <= steps; ++s) {
        double t = double(s) / steps;
        GroupMapSample gt = (s == steps) ? gamma : contracted(t);
        cur = split_multiplicative_from(gt, splitter, cur.gamma1, cur.gamma2, step_opt);
    }
    return cur;
}

}  // namespace holopatch

#endif
