#ifndef HOLOPATCH_INTERPOLATION_HPP
#define HOLOPATCH_INTERPOLATION_HPP

#include <vector>

#include "holopatch/sampled_map.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// Finite interpolation sets and the Lagrange operator L_P in barycentric form.
// Global polynomial interpolation through more than 12 nodes is rejected as
// ill-conditioned.
// ----------------------------------------------------------------------------

constexpr int kMaxInterpolationPoints = 12;

struct InterpolationSet {
    std::vector<cplx> points;
    double snap_radius = 0.0;

    InterpolationSet() = default;
    InterpolationSet(std::vector<cplx> pts, double snap) : points(std::move(pts)), snap_radius(snap) {
        require(int(points.size()) <= kMaxInterpolationPoints,
                "InterpolationSet: more than 12 points rejected");
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i + 1; j < points.size(); ++j)
                require(std::abs(points[i] - points[j]) > 1e-14,
                        "InterpolationSet: points must be pairwise distinct");
    }

    bool empty() const { return points.empty(); }

    /// Points of P that coincide with samples of k (snapped). Throws if a point
    /// lies on k (within snap radius of some sample) but is not itself a sample.
    std::vector<cplx> restrict_to(const DiscretizedCompact& k) const {
        std::vector<cplx> out;
        if (k.empty()) return out;
        SpatialHash hash(k);
        for (cplx p : points) {
            if (k.find_sample(p) >= 0) {
                out.push_back(p);
                continue;
            }
            double d = hash.nearest_distance(p);
            require(d > std::max(snap_radius, k.h * 0.51),
                    "InterpolationSet: point near the set but not snapped to a sample");
        }
        return out;
    }
};

class LagrangePolynomial {
public:
    LagrangePolynomial() = default;  // zero polynomial

    LagrangePolynomial(std::vector<cplx> nodes, std::vector<std::vector<cplx>> node_values)
        : nodes_(std::move(nodes)), values_(std::move(node_values)) {
        require(nodes_.size() == values_.size(), "lagrange: node/value count mismatch");
        require(int(nodes_.size()) <= kMaxInterpolationPoints, "lagrange: too many nodes");
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            for (std::size_t j = i + 1; j < nodes_.size(); ++j)
                require(std::abs(nodes_[i] - nodes_[j]) > 1e-14, "lagrange: duplicate nodes");
        weights_.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            cplx w{1.0, 0.0};
            for (std::size_t j = 0; j < nodes_.size(); ++j)
                if (j != i) w *= nodes_[i] - nodes_[j];
            weights_[i] = 1.0 / w;
        }
        codim_ = values_.empty() ? 1 : int(values_.front().size());
    }

    bool zero() const { return nodes_.empty(); }
    int codim() const { return codim_; }
    const std::vector<cplx>& nodes() const { return nodes_; }

    std::vector<cplx> eval(cplx z) const {
        std::vector<cplx> out(codim_, cplx{0.0, 0.0});
        if (nodes_.empty()) return out;
        // Exact at nodes, including in floating point.
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (z == nodes_[i] || std::abs(z - nodes_[i]) < 1e-300) return values_[i];
        cplx denom{0.0, 0.0};
        std::vector<cplx> num(codim_, cplx{0.0, 0.0});
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            cplx c = weights_[i] / (z - nodes_[i]);
            denom += c;
            for (int j = 0; j < codim_; ++j) num[j] += c * values_[i][j];
        }
        for (int j = 0; j < codim_; ++j) out[j] = num[j] / denom;
        return out;
    }

    cplx eval_scalar(cplx z) const { return eval(z)[0]; }

    /// Basis values ell_i(z); sums to 1.
    std::vector<cplx> basis(cplx z) const {
        std::vector<cplx> out(nodes_.size(), cplx{0.0, 0.0});
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (z == nodes_[i]) {
                out[i] = 1.0;
                return out;
            }
        cplx denom{0.0, 0.0};
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            out[i] = weights_[i] / (z - nodes_[i]);
            denom += out[i];
        }
        for (auto& v : out) v /= denom;
        return out;
    }

private:
    std::vector<cplx> nodes_;
    std::vector<std::vector<cplx>> values_;
    std::vector<cplx> weights_;
    int codim_ = 1;
};

inline LagrangePolynomial lagrange_interpolate(const std::vector<cplx>& nodes,
                                               const std::vector<std::vector<cplx>>& values) {
    if (nodes.empty()) return {};
    return LagrangePolynomial(nodes, values);
}

inline LagrangePolynomial lagrange_interpolate_scalar(const std::vector<cplx>& nodes,
                                                      const std::vector<cplx>& values) {
    std::vector<std::vector<cplx>> v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = {values[i]};
    return lagrange_interpolate(nodes, v);
}

/// L_P(f): interpolate f's values at the P-points (snapped to samples of f's
/// domain) and evaluate the polynomial on the whole domain.
inline SampledMap lagrange_apply(const SampledMap& f, const std::vector<cplx>& pts) {
    SampledMap out(f.domain_ptr(), f.codim());
    if (pts.empty()) return out;
    std::vector<std::vector<cplx>> vals;
    vals.reserve(pts.size());
    for (cplx p : pts) vals.push_back(f.value_at(p));
    LagrangePolynomial L(pts, vals);
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto v = L.eval(f.domain().pos(i));
        for (int j = 0; j < f.codim(); ++j) out.at(i, j) = v[j];
    }
    return out;
}

/// Lebesgue-type constant of L_P on the domain: max over samples of sum |ell_i|.
inline double lebesgue_constant(const DiscretizedCompact& k, const std::vector<cplx>& pts) {
    if (pts.empty()) return 0.0;
    std::vector<std::vector<cplx>> dummy(pts.size(), std::vector<cplx>{cplx{0.0, 0.0}});
    LagrangePolynomial L(pts, dummy);
    double best = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        auto b = L.basis(k.pos(i));
        double s = 0.0;
        for (cplx c : b) s += std::abs(c);
        best = std::max(best, s);
    }
    return best;
}

/// f_eps = f_tilde + L_P(f - f_tilde): equals f at P, close to f_tilde away.
inline SampledMap interpolation_correction(const SampledMap& f, const SampledMap& f_tilde,
                                           const InterpolationSet& P) {
    require(f.domain_ptr().get() == f_tilde.domain_ptr().get() || &f.domain() == &f_tilde.domain(),
            "interpolation_correction: domains must match");
    auto pts = P.restrict_to(f.domain());
    SampledMap diff = f;
    diff -= f_tilde;
    SampledMap corr = lagrange_apply(diff, pts);
    SampledMap out = f_tilde;
    out += corr;
    return out;
}

/// f - L_P(f): vanishes at P; idempotent.
inline SampledMap project_vanishing(const SampledMap& f, const InterpolationSet& P) {
    auto pts = P.restrict_to(f.domain());
    SampledMap out = f;
    out -= lagrange_apply(f, pts);
    return out;
}

}  // namespace holopatch

#endif
