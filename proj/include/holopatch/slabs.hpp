#ifndef HOLOPATCH_SLABS_HPP
#define HOLOPATCH_SLABS_HPP

#include "holopatch/good_pair.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// Generic fiber directions and slab decompositions. A direction v is generic
// when boundary tangencies with v are finitely many, flat boundary runs avoid
// v, and v stays an angular margin away from every tangent at a nonsmooth
// point. The decomposition cuts the set into narrow strips perpendicular to v
// whose centers include every exceptional abscissa, with at-most-double
// overlaps whose components pass the star-shape test.
// ----------------------------------------------------------------------------

struct DirectionChoice {
    cplx v;             // unit fiber direction
    double margin = 0.0;  // angular margin to the obstruction set (radians)
    int tangency_sites = 0;
    std::vector<double> obstruction_angles;  // mod pi
};

namespace detail {

inline double angle_mod_pi(cplx t) {
    double a = std::atan2(t.imag(), t.real());
    while (a < 0) a += kPi;
    while (a >= kPi) a -= kPi;
    return a;
}

inline double angular_distance_mod_pi(double a, double b) {
    double d = std::abs(a - b);
    while (d >= kPi) d -= kPi;
    return std::min(d, kPi - d);
}

}  // namespace detail

struct DirectionOptions {
    double tau = 10.0 * kPi / 180.0;  // transversality margin
    int min_run = 3;                   // samples forming a flat run
    double run_angle_tol = 1e-9;
};

/// Choose a generic fiber direction from boundary tangents. Rotation
/// equivariant: all candidates are derived from the data.
inline DirectionChoice choose_generic_direction(const DiscretizedCompact& k,
                                                const std::vector<cplx>& nonsmooth_points = {},
                                                const DirectionOptions& opt = {}) {
    require(!k.boundary_samples.empty(), "choose_generic_direction: no boundary samples");
    const auto& bs = k.boundary_samples;

    std::vector<double> obstructions;
    // Flat runs: consecutive boundary samples with locked tangents. A line
    // parallel to such a run meets the boundary in a segment, so the run angle
    // is excluded.
    {
        int run = 1;
        for (std::size_t i = 1; i <= bs.size(); ++i) {
            bool same = i < bs.size() &&
                        detail::angular_distance_mod_pi(detail::angle_mod_pi(bs[i].tangent),
                                                        detail::angle_mod_pi(bs[i - 1].tangent)) <
                            opt.run_angle_tol;
            if (same) {
                ++run;
            } else {
                if (run >= opt.min_run)
                    obstructions.push_back(detail::angle_mod_pi(bs[i - 1].tangent));
                run = 1;
            }
        }
    }
    // Tangents at nonsmooth points (all boundary samples within 2.5h).
    for (cplx p : nonsmooth_points)
        for (const auto& b : bs)
            if (std::abs(b.pos - p) <= 2.5 * k.h)
                obstructions.push_back(detail::angle_mod_pi(b.tangent));

    // Dedupe.
    std::sort(obstructions.begin(), obstructions.end());
    obstructions.erase(std::unique(obstructions.begin(), obstructions.end(),
                                   [](double a, double b) { return std::abs(a - b) < 1e-7; }),
                       obstructions.end());

    DirectionChoice out;
    out.obstruction_angles = obstructions;
    double anchor = detail::angle_mod_pi(bs.front().tangent);

    if (obstructions.empty()) {
        // Anything is generic; anchor to the first tangent so the choice
        // rotates with the data.
        double a = anchor + kPi / 2.0;
        out.v = std::polar(1.0, a);
        out.margin = kPi / 2.0;
    } else {
        // Midpoints of the cyclic gaps; widest gap wins, ties anchored to the
        // first tangent angle.
        double best_w = -1.0, best_mid = 0.0, best_off = 1e9;
        for (std::size_t i = 0; i < obstructions.size(); ++i) {
            double a = obstructions[i];
            double b = (i + 1 < obstructions.size()) ? obstructions[i + 1] : obstructions[0] + kPi;
            double w = b - a;
            double mid = std::fmod(a + w / 2.0, kPi);
            double off = std::fmod(mid - anchor + 2.0 * kPi, kPi);
            bool better = w > best_w + 1e-12 || (std::abs(w - best_w) <= 1e-12 && off < best_off);
            if (better) {
                best_w = w;
                best_mid = mid;
                best_off = off;
            }
        }
        out.v = std::polar(1.0, best_mid);
        out.margin = std::min(best_w / 2.0, kPi / 2.0);
    }
    require(out.margin >= opt.tau,
            "choose_generic_direction: no direction clears the transversality margin");

    // Tangency sites: sign crossings of sin(angle(tangent) - angle(v)) along
    // the boundary walk.
    double theta = detail::angle_mod_pi(out.v);
    int crossings = 0;
    double prev = 0.0;
    bool have_prev = false;
    for (std::size_t i = 0; i <= bs.size(); ++i) {
        const auto& b = bs[i % bs.size()];
        double s = std::sin(std::atan2(b.tangent.imag(), b.tangent.real()) - theta);
        if (have_prev && s * prev < 0) ++crossings;
        if (s != 0.0) {
            prev = s;
            have_prev = true;
        }
    }
    out.tangency_sites = crossings;
    return out;
}

// ----------------------------------------------------------------------------
// Slab decomposition
// ----------------------------------------------------------------------------

struct SlabDecomposition {
    cplx direction;               // fiber direction (rotated to vertical internally)
    double rotation = 0.0;        // plane rotation angle used (v -> vertical)
    std::vector<double> cuts;     // strip centers c_1 < ... < c_M (rotated abscissae)
    std::vector<double> half_widths;
    std::vector<std::shared_ptr<const DiscretizedCompact>> slabs;
    std::vector<int> odd_index;   // 1-based odd slabs
    std::vector<int> even_index;
    std::vector<double> exceptional;  // rotated abscissae of E

    double abscissa(cplx z) const { return (z * std::polar(1.0, rotation)).real(); }
};

struct SlabRequirement {
    cplx point;      // must be interior to one slab, absent from its neighbors
    int parity = 0;  // 0 = any, 1 = odd index, 2 = even index
};

struct SlabOptions {
    double eta_factor = 1.0 / 128.0;  // eta = delta * factor (< delta/100)
    double spacing_factor = 1.5;      // center spacing = spacing_factor * eta
    int max_refine = 5;               // star-shape bisection rounds
    double min_overlap_cells = 3.0;   // required overlap width in units of h
};

namespace detail {

/// Abscissae of tangency sites for the rotated set (fiber direction vertical).
inline std::vector<double> tangency_abscissae(const DiscretizedCompact& k, double rotation) {
    std::vector<double> out;
    const auto& bs = k.boundary_samples;
    if (bs.empty()) return out;
    cplx rot = std::polar(1.0, rotation);
    // Sign crossings of the x-component of the rotated tangent.
    for (std::size_t i = 0; i < bs.size(); ++i) {
        const auto& a = bs[i];
        const auto& b = bs[(i + 1) % bs.size()];
        // skip wrap-around between different primitives (distance jump)
        if (std::abs(a.pos - b.pos) > 4.0 * k.h) continue;
        double sa = (a.tangent * rot).imag();
        double sb = (b.tangent * rot).imag();
        if (sa == 0.0) out.push_back((a.pos * rot).real());
        if (sa * sb < 0) out.push_back(((a.pos + b.pos) * 0.5 * rot).real());
    }
    return out;
}

}  // namespace detail

inline SlabDecomposition slab_decompose(std::shared_ptr<const DiscretizedCompact> k, cplx v,
                                        double delta,
                                        const std::vector<SlabRequirement>& required = {},
                                        const SlabOptions& opt = {}) {
    require(k && !k->empty(), "slab_decompose: empty compact");
    require(delta > 0.0, "slab_decompose: delta must be > 0");
    const double h = k->h;

    SlabDecomposition out;
    out.direction = v / std::abs(v);
    // Rotate v to vertical: multiply the plane by e^{i rho}, rho = pi/2 - arg v.
    out.rotation = kPi / 2.0 - std::atan2(v.imag(), v.real());
    cplx rot = std::polar(1.0, out.rotation);

    // Exceptional abscissae: tangencies, required points, and the extremes.
    std::vector<std::pair<double, int>> mandatory;  // (abscissa, parity)
    for (double c : detail::tangency_abscissae(*k, out.rotation)) mandatory.push_back({c, 0});
    double xmin = 1e300, xmax = -1e300;
    for (const auto& s : k->samples) {
        double x = (s.pos * rot).real();
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    mandatory.push_back({xmin, 0});
    mandatory.push_back({xmax, 0});
    for (const auto& r : required) mandatory.push_back({(r.point * rot).real(), r.parity});

    std::sort(mandatory.begin(), mandatory.end());
    // Merge near-coincident abscissae; a parity requirement wins over none and
    // conflicting parities are an error.
    std::vector<std::pair<double, int>> merged;
    for (auto [x, p] : mandatory) {
        if (!merged.empty() && std::abs(x - merged.back().first) < 2.0 * h) {
            int& mp = merged.back().second;
            if (p != 0) {
                require(mp == 0 || mp == p,
                        "slab_decompose: conflicting parity requirements too close together");
                mp = p;
                merged.back().first = x;  // required points take the exact abscissa
            }
        } else {
            merged.push_back({x, p});
        }
    }
    for (auto [x, p] : merged) out.exceptional.push_back(x);

    // Half-width: under delta/100 by contract, and small against the tightest
    // mandatory gap so filler counts of both parities stay feasible.
    double min_gap = 1e300;
    for (std::size_t mi = 1; mi < merged.size(); ++mi)
        min_gap = std::min(min_gap, merged[mi].first - merged[mi - 1].first);
    double eta = delta * opt.eta_factor;
    if (min_gap < 1e300) eta = std::min(eta, 0.3 * min_gap);
    require(2.0 * eta - opt.min_overlap_cells * h > eta,
            "slab_decompose: delta too small for the grid resolution");

    for (int attempt = 0; attempt <= opt.max_refine; ++attempt) {
        // Feasible filler counts between consecutive mandatory centers: the
        // center step must keep overlaps positive (step <= 2 eta - m h) and
        // non-adjacent slabs disjoint (step > eta).
        const double step_max = 2.0 * eta - opt.min_overlap_cells * h;
        const double step_min = eta * (1.0 + 1e-9);
        std::vector<double> cuts;
        bool parity_ok = true;
        for (std::size_t mi = 0; mi < merged.size() && parity_ok; ++mi) {
            auto [x, p] = merged[mi];
            if (cuts.empty()) {
                cuts.push_back(x);
                continue;
            }
            double gap = x - cuts.back();
            if (gap < 1e-12) continue;
            int n_min = std::max(0, int(std::ceil(gap / step_max)) - 1);
            int n_max = int(std::floor(gap / step_min)) - 1;
            require(n_min <= n_max,
                    "slab_decompose: mandatory abscissae too close for double overlaps");
            int fillers = n_min;
            if (p != 0) {
                auto index_parity = [&](int fill) {
                    std::size_t idx = cuts.size() + std::size_t(fill) + 1;  // 1-based
                    return (idx % 2 == 1) ? 1 : 2;
                };
                while (fillers <= n_max && index_parity(fillers) != p) ++fillers;
                if (fillers > n_max) {
                    parity_ok = false;
                    break;
                }
            }
            double step = gap / double(fillers + 1);
            for (int t = 1; t <= fillers; ++t) cuts.push_back(cuts.back() + step);
            cuts.push_back(x);
        }
        require(parity_ok, "slab_decompose: cannot satisfy a parity requirement");

        // Slab compacts.
        std::vector<std::shared_ptr<const DiscretizedCompact>> slabs;
        bool star_ok = true;
        for (std::size_t j = 0; j < cuts.size(); ++j) {
            double lo = cuts[j] - eta, hi = cuts[j] + eta;
            auto slab = std::make_shared<DiscretizedCompact>(restrict_compact(
                *k,
                [&](std::size_t i) {
                    double x = (k->pos(i) * rot).real();
                    return x >= lo - 1e-12 && x <= hi + 1e-12;
                },
                2.0 * h));
            slabs.push_back(slab);
        }
        // Star-shape of consecutive overlaps.
        for (std::size_t j = 0; j + 1 < cuts.size() && star_ok; ++j) {
            auto inter = intersect_compact(*slabs[j], *slabs[j + 1]);
            if (inter.empty()) continue;
            for (const auto& comp_idx : component_index_sets(inter)) {
                auto comp = restrict_compact(inter, [&](std::size_t i) {
                    return std::binary_search(comp_idx.begin(), comp_idx.end(), i);
                });
                if (!star_shaped_check(comp).ok) {
                    star_ok = false;
                    break;
                }
            }
        }
        if (!star_ok) {
            eta *= 0.7;
            require(attempt < opt.max_refine,
                    "slab_decompose: star-shape refinement limit reached");
            continue;
        }

        out.cuts = cuts;
        out.half_widths.assign(cuts.size(), eta);
        out.slabs = slabs;
        for (std::size_t j = 0; j < cuts.size(); ++j)
            ((j + 1) % 2 == 1 ? out.odd_index : out.even_index).push_back(int(j + 1));

        // Requirements: the point is interior to its slab and in no neighbor.
        for (const auto& r : required) {
            double x = (r.point * rot).real();
            int home = -1;
            for (std::size_t j = 0; j < cuts.size(); ++j)
                if (std::abs(x - cuts[j]) < 1e-9) home = int(j);
            require(home >= 0, "slab_decompose: required point lost its cut");
            if (r.parity != 0)
                require(((home + 1) % 2 == 1 ? 1 : 2) == r.parity,
                        "slab_decompose: required parity not achieved");
            if (home > 0) require(x > cuts[home - 1] + eta, "slab_decompose: point leaks left");
            if (home + 1 < int(cuts.size()))
                require(x < cuts[home + 1] - eta, "slab_decompose: point leaks right");
        }
        return out;
    }
    throw std::runtime_error("slab_decompose: refinement failed");
}

/// Union of the odd / even slabs as compacts (the parity pair).
inline std::pair<std::shared_ptr<const DiscretizedCompact>,
                 std::shared_ptr<const DiscretizedCompact>>
slab_parity_pair(const SlabDecomposition& sd) {
    require(!sd.slabs.empty(), "slab_parity_pair: no slabs");
    DiscretizedCompact odd, even;
    bool first_odd = true, first_even = true;
    for (std::size_t j = 0; j < sd.slabs.size(); ++j) {
        bool is_odd = (j + 1) % 2 == 1;
        DiscretizedCompact& acc = is_odd ? odd : even;
        bool& first = is_odd ? first_odd : first_even;
        if (first) {
            acc = *sd.slabs[j];
            first = false;
        } else {
            acc = union_compact(acc, *sd.slabs[j]);
        }
    }
    return {std::make_shared<DiscretizedCompact>(std::move(odd)),
            std::make_shared<DiscretizedCompact>(std::move(even))};
}

/// Coverage and double-overlap scan (the decomposition invariants).
struct SlabInvariantReport {
    bool covered = true;
    bool at_most_double = true;
    std::size_t uncovered = 0;
    std::size_t triple = 0;
};

inline SlabInvariantReport check_slab_invariants(const DiscretizedCompact& k,
                                                 const SlabDecomposition& sd) {
    SlabInvariantReport rep;
    for (std::size_t i = 0; i < k.size(); ++i) {
        int count = 0;
        for (const auto& s : sd.slabs)
            if (s->has_sample(k.pos(i))) ++count;
        if (count == 0) {
            rep.covered = false;
            ++rep.uncovered;
        }
        if (count > 2) {
            rep.at_most_double = false;
            ++rep.triple;
        }
    }
    return rep;
}

}  // namespace holopatch

#endif
