#ifndef HOLOPATCH_TRANSITION_HPP
#define HOLOPATCH_TRANSITION_HPP

#include <functional>

#include "holopatch/cartan.hpp"
#include "holopatch/sampled_map.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// TransitionMap: a holomorphic immersion of C^n preserving the last coordinate,
// with a Jacobian oracle valued in the block group. Built-in families cover the
// chart transitions the pipelines use; inverses are registered alongside.
// ----------------------------------------------------------------------------

struct TransitionMap {
    int n = 2;
    std::function<std::vector<cplx>(const std::vector<cplx>&)> evaluate;
    std::function<AffineBlockMatrix(const std::vector<cplx>&)> jacobian;
    bool preserves_last_coordinate = true;
    std::string name;

    std::vector<cplx> operator()(const std::vector<cplx>& z) const { return evaluate(z); }

    /// Probe the structural invariants on random points in a box of the given
    /// radius: the last coordinate passes through and the Jacobian matches
    /// finite differences to O(step^2).
    void validate(Rng& rng, double radius = 1.0, int probes = 16) const {
        for (int t = 0; t < probes; ++t) {
            std::vector<cplx> z(n);
            for (auto& v : z) v = radius * rng.unit_disk();
            auto w = evaluate(z);
            require(w.size() == std::size_t(n), "transition: wrong output dimension");
            require(std::abs(w[n - 1] - z[n - 1]) <= 1e-12 * (1.0 + std::abs(z[n - 1])),
                    "transition: last coordinate not preserved");
            auto jac = jacobian(z);
            double step = 1e-5 * std::max(1.0, radius);
            for (int j = 0; j < n; ++j) {
                auto zp = z, zm = z;
                zp[j] += step;
                zm[j] -= step;
                auto wp = evaluate(zp), wm = evaluate(zm);
                for (int i = 0; i < n - 1; ++i) {
                    cplx fd = (wp[i] - wm[i]) / (2.0 * step);
                    cplx an = (j < n - 1) ? jac.A(i, j) : jac.b[i];
                    require(std::abs(fd - an) <= 1e-6 * (1.0 + std::abs(an)),
                            "transition: jacobian does not match finite differences");
                }
            }
            require(block::condition(jac) < 1e12, "transition: jacobian not invertible");
        }
    }
};

inline TransitionMap identity_transition(int n = 2) {
    TransitionMap t;
    t.n = n;
    t.name = "identity";
    t.evaluate = [](const std::vector<cplx>& z) { return z; };
    t.jacobian = [n](const std::vector<cplx>&) { return AffineBlockMatrix::identity(n); };
    return t;
}

/// F(z1, z2) = (a z1 + b + c z2, z2)
inline TransitionMap affine_transition(cplx a, cplx b, cplx c) {
    require(std::abs(a) > 1e-12, "affine transition: a must be nonzero");
    TransitionMap t;
    t.n = 2;
    t.name = "affine";
    t.evaluate = [a, b, c](const std::vector<cplx>& z) {
        return std::vector<cplx>{a * z[0] + b + c * z[1], z[1]};
    };
    t.jacobian = [a, c](const std::vector<cplx>&) {
        auto m = AffineBlockMatrix::identity(2);
        m.A(0, 0) = a;
        m.b[0] = c;
        return m;
    };
    return t;
}

inline TransitionMap affine_transition_inverse(cplx a, cplx b, cplx c) {
    return affine_transition(1.0 / a, -b / a, -c / a);
}

/// F(z1, z2) = (z1 + s z2^2, z2)
inline TransitionMap shear_square_transition(cplx s) {
    TransitionMap t;
    t.n = 2;
    t.name = "shear_square";
    t.evaluate = [s](const std::vector<cplx>& z) {
        return std::vector<cplx>{z[0] + s * z[1] * z[1], z[1]};
    };
    t.jacobian = [s](const std::vector<cplx>& z) {
        auto m = AffineBlockMatrix::identity(2);
        m.b[0] = 2.0 * s * z[1];
        return m;
    };
    return t;
}

/// F(z1, z2) = (a(z2) z1 + b(z2), z2) with polynomial coefficient tables;
/// the line-bundle style transition (z2 z1, z2) is a="0,1", b="0".
inline TransitionMap linear_scale_transition(std::vector<cplx> a_coeff, std::vector<cplx> b_coeff) {
    require(!a_coeff.empty(), "linear_scale transition: a(z2) missing");
    TransitionMap t;
    t.n = 2;
    t.name = "linear_scale";
    auto poly = [](const std::vector<cplx>& c, cplx z) {
        cplx acc{0, 0}, m{1, 0};
        for (cplx v : c) {
            acc += v * m;
            m *= z;
        }
        return acc;
    };
    auto dpoly = [](const std::vector<cplx>& c, cplx z) {
        cplx acc{0, 0}, m{1, 0};
        for (std::size_t k = 1; k < c.size(); ++k) {
            acc += double(k) * c[k] * m;
            m *= z;
        }
        return acc;
    };
    t.evaluate = [a_coeff, b_coeff, poly](const std::vector<cplx>& z) {
        return std::vector<cplx>{poly(a_coeff, z[1]) * z[0] + poly(b_coeff, z[1]), z[1]};
    };
    t.jacobian = [a_coeff, b_coeff, poly, dpoly](const std::vector<cplx>& z) {
        auto m = AffineBlockMatrix::identity(2);
        m.A(0, 0) = poly(a_coeff, z[1]);
        m.b[0] = dpoly(a_coeff, z[1]) * z[0] + dpoly(b_coeff, z[1]);
        require(std::abs(m.A(0, 0)) > 1e-12, "linear_scale transition: a(z2) vanishes on the set");
        return m;
    };
    return t;
}

/// Forward/inverse pair; all built-ins have closed-form inverses.
struct TransitionPair {
    TransitionMap forward;
    TransitionMap inverse;
};

inline TransitionPair make_identity_pair(int n = 2) {
    return {identity_transition(n), identity_transition(n)};
}
inline TransitionPair make_affine_pair(cplx a, cplx b, cplx c) {
    return {affine_transition(a, b, c), affine_transition_inverse(a, b, c)};
}
inline TransitionPair make_shear_square_pair(cplx s) {
    return {shear_square_transition(s), shear_square_transition(-s)};
}
inline TransitionPair make_linear_scale_pair(std::vector<cplx> a_coeff, std::vector<cplx> b_coeff) {
    TransitionMap fwd = linear_scale_transition(a_coeff, b_coeff);
    TransitionMap inv;
    inv.n = 2;
    inv.name = "linear_scale_inverse";
    auto poly = [](const std::vector<cplx>& c, cplx z) {
        cplx acc{0, 0}, m{1, 0};
        for (cplx v : c) {
            acc += v * m;
            m *= z;
        }
        return acc;
    };
    inv.evaluate = [a_coeff, b_coeff, poly](const std::vector<cplx>& z) {
        cplx a = poly(a_coeff, z[1]);
        require(std::abs(a) > 1e-12, "linear_scale inverse: a(z2) vanishes");
        return std::vector<cplx>{(z[0] - poly(b_coeff, z[1])) / a, z[1]};
    };
    inv.jacobian = [a_coeff, b_coeff, poly](const std::vector<cplx>& z) {
        // Finite-difference fallback is avoided: derive from the forward blocks.
        cplx a = poly(a_coeff, z[1]);
        std::vector<cplx> da(a_coeff.size() > 1 ? a_coeff.begin() + 1 : a_coeff.end(), a_coeff.end());
        for (std::size_t k = 0; k < da.size(); ++k) da[k] *= double(k + 1);
        std::vector<cplx> db(b_coeff.size() > 1 ? b_coeff.begin() + 1 : b_coeff.end(), b_coeff.end());
        for (std::size_t k = 0; k < db.size(); ++k) db[k] *= double(k + 1);
        cplx dav = poly(da, z[1]), dbv = poly(db, z[1]);
        auto m = AffineBlockMatrix::identity(2);
        m.A(0, 0) = 1.0 / a;
        m.b[0] = (-(z[0] - poly(b_coeff, z[1])) * dav / a - dbv) / a;
        return m;
    };
    return {fwd, inv};
}

// ----------------------------------------------------------------------------
// SectionChart: chart representation of a section, a SampledMap whose last
// component equals the sample coordinate exactly.
// ----------------------------------------------------------------------------

struct SectionChart {
    SampledMap values;  // codim n; last component = z by construction

    int n() const { return values.codim(); }
    const DiscretizedCompact& domain() const { return values.domain(); }

    static SectionChart from_scalar(const SampledMap& t) {
        SectionChart s;
        s.values = SampledMap(t.domain_ptr(), t.codim() + 1);
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (int j = 0; j < t.codim(); ++j) s.values.at(i, j) = t.at(i, j);
            s.values.at(i, t.codim()) = t.domain().pos(i);
        }
        return s;
    }

    static SectionChart from_function(std::shared_ptr<const DiscretizedCompact> domain, int n,
                                      const std::function<std::vector<cplx>(cplx)>& t) {
        SectionChart s;
        s.values = SampledMap(std::move(domain), n);
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            auto v = t(s.values.domain().pos(i));
            for (int j = 0; j < n - 1; ++j) s.values.at(i, j) = v[j];
            s.values.at(i, n - 1) = s.values.domain().pos(i);
        }
        return s;
    }

    void check_invariant() const {
        int last = n() - 1;
        for (std::size_t i = 0; i < values.size(); ++i)
            require(values.at(i, last) == values.domain().pos(i),
                    "SectionChart: last component must equal the base coordinate");
    }

    std::vector<cplx> point(std::size_t i) const {
        std::vector<cplx> v(n());
        for (int j = 0; j < n(); ++j) v[j] = values.at(i, j);
        return v;
    }

    /// Push through a transition map; the base coordinate is preserved.
    SectionChart pushed(const TransitionMap& f) const {
        SectionChart out;
        out.values = SampledMap(values.domain_ptr(), n());
        for (std::size_t i = 0; i < values.size(); ++i) {
            auto w = f(point(i));
            for (int j = 0; j < n() - 1; ++j) out.values.at(i, j) = w[j];
            out.values.at(i, n() - 1) = values.domain().pos(i);
        }
        return out;
    }

    /// Restriction to another compact whose samples are shared positions.
    SectionChart restricted(std::shared_ptr<const DiscretizedCompact> sub) const {
        SectionChart out;
        out.values = SampledMap(sub, n());
        for (std::size_t i = 0; i < sub->size(); ++i) {
            int j = values.domain().find_sample(sub->pos(i));
            require(j >= 0, "SectionChart: restriction target has unknown samples");
            for (int c = 0; c < n(); ++c) out.values.at(i, c) = values.at(j, c);
        }
        return out;
    }
};

}  // namespace holopatch

#endif
