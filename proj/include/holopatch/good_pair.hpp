#ifndef HOLOPATCH_GOOD_PAIR_HPP
#define HOLOPATCH_GOOD_PAIR_HPP

#include <optional>

#include "holopatch/compact.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// Star-shape test. A component is accepted when some candidate center p sees
// every sample q along a segment staying within h of the component.
// Candidates: the sample nearest the centroid, and the deepest sample (max
// distance from the component's sample-level boundary).
// ----------------------------------------------------------------------------

struct StarShapeResult {
    bool ok = false;
    cplx center{0.0, 0.0};
};

inline StarShapeResult star_shaped_check(const DiscretizedCompact& comp) {
    StarShapeResult res;
    if (comp.empty()) return res;
    if (comp.size() == 1) {
        res.ok = true;
        res.center = comp.pos(0);
        return res;
    }
    const double h = comp.h;
    SpatialHash hash(comp);

    // Sample-level boundary: fewer than 8 lattice neighbors within 1.5h.
    std::vector<cplx> rim;
    for (std::size_t i = 0; i < comp.size(); ++i) {
        int n = 0;
        hash.for_ball(comp.pos(i), 1.5 * h, [&](std::size_t j) {
            if (j != i) ++n;
        });
        if (n < 8) rim.push_back(comp.pos(i));
    }
    std::vector<Sample> rim_samples;
    rim_samples.reserve(rim.size());
    for (cplx z : rim) rim_samples.push_back({z, 0.0, false});
    SpatialHash rim_hash(rim_samples, 2.0 * h);

    KahanSumC centroid_acc;
    for (std::size_t i = 0; i < comp.size(); ++i) centroid_acc.add(comp.pos(i));
    cplx centroid = centroid_acc.value() / double(comp.size());

    std::vector<cplx> candidates;
    int ci = hash.nearest_index(centroid);
    if (ci >= 0) candidates.push_back(comp.pos(ci));
    // Deepest sample.
    double best_depth = -1.0;
    cplx deepest = comp.pos(0);
    for (std::size_t i = 0; i < comp.size(); ++i) {
        double d = rim.empty() ? 0.0 : rim_hash.nearest_distance(comp.pos(i));
        if (d > best_depth) {
            best_depth = d;
            deepest = comp.pos(i);
        }
    }
    candidates.push_back(deepest);

    for (cplx p : candidates) {
        bool all_ok = true;
        for (std::size_t i = 0; i < comp.size() && all_ok; ++i) {
            cplx q = comp.pos(i);
            double len = std::abs(q - p);
            int steps = std::max(1, int(std::ceil(len / (h / 2.0))));
            for (int s = 1; s < steps && all_ok; ++s) {
                cplx w = p + (q - p) * (double(s) / steps);
                if (hash.nearest_distance(w) > h) all_ok = false;
            }
        }
        if (all_ok) {
            res.ok = true;
            res.center = p;
            return res;
        }
    }
    return res;
}

// ----------------------------------------------------------------------------
// GoodPairContext: validated pair (K1, K2) with cutoff chi and dbar(chi).
//
// Difference sets are taken with two cells of slack (samples farther than 2h
// from the other compact), so pairs whose true difference closures pinch at
// isolated corner points (overlapping or tangent disks) stay numerically good.
// chi is built from distances d1, d2 to the difference sets:
//     chi = sigma(clamp((d2/(d1+d2) - 1/4) * 2, 0, 1)),  sigma(t) = t^2 (3-2t),
// which is exactly 1 within separation/4 of cl(K1\K2) and 0 within
// separation/4 of cl(K2\K1).
// ----------------------------------------------------------------------------

struct GoodPairContext {
    std::shared_ptr<const DiscretizedCompact> k1, k2, k12;
    double separation = 0.0;
    std::vector<cplx> diff1, diff2;  // discrete cl(K1\K2), cl(K2\K1)

    // Cutoff sampled on a lattice grid covering K1 u K2 (inflated by 2 cells).
    long gx0 = 0, gy0 = 0, gnx = 0, gny = 0;
    std::vector<double> chi_grid;
    std::vector<cplx> dbar_chi_grid;

    std::vector<cplx> star_centers;  // one per component of K12

    double h() const { return k1->h; }

    bool grid_lookup(cplx z, std::size_t& out) const {
        double h_ = h();
        long i = std::lround(z.real() / h_), j = std::lround(z.imag() / h_);
        if (i < gx0 || i >= gx0 + gnx || j < gy0 || j >= gy0 + gny) return false;
        out = std::size_t(j - gy0) * std::size_t(gnx) + std::size_t(i - gx0);
        return true;
    }

    double chi_at(cplx z) const {
        std::size_t idx;
        require(grid_lookup(z, idx), "GoodPairContext: point outside the cutoff grid");
        return chi_grid[idx];
    }

    cplx dbar_chi_at(cplx z) const {
        std::size_t idx;
        require(grid_lookup(z, idx), "GoodPairContext: point outside the cutoff grid");
        return dbar_chi_grid[idx];
    }
};

namespace detail {

inline double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

}  // namespace detail

inline void build_cutoff(GoodPairContext& ctx) {
    require(ctx.separation > 0.0, "build_cutoff: separation must be > 0");
    const double h = ctx.h();
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    auto grow = [&](const DiscretizedCompact& k) {
        for (const auto& s : k.samples) {
            x0 = std::min(x0, s.pos.real());
            x1 = std::max(x1, s.pos.real());
            y0 = std::min(y0, s.pos.imag());
            y1 = std::max(y1, s.pos.imag());
        }
    };
    grow(*ctx.k1);
    grow(*ctx.k2);
    ctx.gx0 = long(std::floor(x0 / h)) - 2;
    ctx.gy0 = long(std::floor(y0 / h)) - 2;
    ctx.gnx = long(std::ceil(x1 / h)) + 2 - ctx.gx0 + 1;
    ctx.gny = long(std::ceil(y1 / h)) + 2 - ctx.gy0 + 1;

    auto to_samples = [](const std::vector<cplx>& pts) {
        std::vector<Sample> s;
        s.reserve(pts.size());
        for (cplx z : pts) s.push_back({z, 0.0, false});
        return s;
    };
    SpatialHash h1(to_samples(ctx.diff1), 2.0 * h), h2(to_samples(ctx.diff2), 2.0 * h);

    ctx.chi_grid.assign(std::size_t(ctx.gnx) * std::size_t(ctx.gny), 0.0);
    for (long j = 0; j < ctx.gny; ++j)
        for (long i = 0; i < ctx.gnx; ++i) {
            cplx z{double(ctx.gx0 + i) * h, double(ctx.gy0 + j) * h};
            double d1 = h1.nearest_distance(z);
            double d2 = h2.nearest_distance(z);
            double chi;
            if (!std::isfinite(d1) && !std::isfinite(d2)) chi = 0.5;
            else if (!std::isfinite(d2)) chi = 1.0;  // only K1-side present
            else if (!std::isfinite(d1)) chi = 0.0;
            else {
                double ratio = d2 / (d1 + d2);
                chi = detail::smoothstep((ratio - 0.25) * 2.0);
            }
            ctx.chi_grid[std::size_t(j) * std::size_t(ctx.gnx) + std::size_t(i)] = chi;
        }

    // dbar(chi) by centered differences; zero on the outermost grid frame.
    ctx.dbar_chi_grid.assign(ctx.chi_grid.size(), cplx{0.0, 0.0});
    auto chi_of = [&](long i, long j) {
        return ctx.chi_grid[std::size_t(j) * std::size_t(ctx.gnx) + std::size_t(i)];
    };
    for (long j = 1; j + 1 < ctx.gny; ++j)
        for (long i = 1; i + 1 < ctx.gnx; ++i) {
            double dx = (chi_of(i + 1, j) - chi_of(i - 1, j)) / (2.0 * h);
            double dy = (chi_of(i, j + 1) - chi_of(i, j - 1)) / (2.0 * h);
            ctx.dbar_chi_grid[std::size_t(j) * std::size_t(ctx.gnx) + std::size_t(i)] =
                0.5 * cplx{dx, dy};
        }
}

struct GoodPairOptions {
    bool check_contractible = true;
    double slack_cells = 2.0;  // difference-set slack, in units of h
};

inline GoodPairContext validate_good_pair(std::shared_ptr<const DiscretizedCompact> k1,
                                          std::shared_ptr<const DiscretizedCompact> k2,
                                          const GoodPairOptions& opt = {}) {
    require(k1 && k2 && !k1->empty() && !k2->empty(), "validate_good_pair: empty compact");
    require(std::abs(k1->h - k2->h) < 1e-15, "validate_good_pair: mismatched h");
    const double h = k1->h;

    GoodPairContext ctx;
    ctx.k1 = k1;
    ctx.k2 = k2;
    ctx.k12 = std::make_shared<DiscretizedCompact>(intersect_compact(*k1, *k2));

    SpatialHash hash1(*k1), hash2(*k2);
    const double slack = opt.slack_cells * h;
    for (const auto& s : k1->samples)
        if (hash2.nearest_distance(s.pos) > slack) ctx.diff1.push_back(s.pos);
    for (const auto& s : k2->samples)
        if (hash1.nearest_distance(s.pos) > slack) ctx.diff2.push_back(s.pos);

    if (ctx.diff1.empty() || ctx.diff2.empty()) {
        // One compact inside the other's slack band: separation is vacuous.
        ctx.separation = std::numeric_limits<double>::infinity();
    } else {
        auto to_samples = [](const std::vector<cplx>& pts) {
            std::vector<Sample> s;
            for (cplx z : pts) s.push_back({z, 0.0, false});
            return s;
        };
        SpatialHash dh(to_samples(ctx.diff2), 2.0 * h);
        double sep = std::numeric_limits<double>::infinity();
        for (cplx z : ctx.diff1) sep = std::min(sep, dh.nearest_distance(z));
        ctx.separation = sep;
        require(sep > 2.0 * h,
                "validate_good_pair: difference closures not numerically disjoint (separation <= 2h)");
    }

    require(!ctx.k12->empty(), "validate_good_pair: empty intersection");
    if (opt.check_contractible) {
        auto comps = component_index_sets(*ctx.k12);
        for (const auto& idx : comps) {
            DiscretizedCompact comp = restrict_compact(*ctx.k12, [&](std::size_t i) {
                return std::binary_search(idx.begin(), idx.end(), i);
            });
            auto star = star_shaped_check(comp);
            require(star.ok, "validate_good_pair: an intersection component fails the star-shape check");
            ctx.star_centers.push_back(star.center);
        }
    }

    build_cutoff(ctx);
    return ctx;
}

}  // namespace holopatch

#endif
