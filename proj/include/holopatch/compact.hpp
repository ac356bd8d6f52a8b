#ifndef HOLOPATCH_COMPACT_HPP
#define HOLOPATCH_COMPACT_HPP

#include <algorithm>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "holopatch/geometry.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// DiscretizedCompact: a compact planar set as quadrature samples. 2D regions
// are sampled on the global lattice { (i*h, j*h) } with supersampled cell-area
// weights; arcs are sampled along their length with zero weights. Two compacts
// built at the same h share sample positions bit-exactly on their overlap.
// ----------------------------------------------------------------------------

struct Sample {
    cplx pos;
    double weight = 0.0;
    bool is_interior = false;
};

struct BoundarySample {
    cplx pos;
    cplx tangent;  // unit
};

class SpatialHash;

class DiscretizedCompact {
public:
    double h = 0.0;
    std::vector<Sample> samples;
    std::vector<BoundarySample> boundary_samples;
    std::shared_ptr<const PrimitiveSet> primitives;  // may be null for mask compacts
    std::vector<int> component_labels;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    cplx pos(std::size_t i) const { return samples[i].pos; }

    double total_weight() const {
        KahanSum s;
        for (const auto& q : samples) s.add(q.weight);
        return s.value();
    }

    /// Index of the sample at a given position (quantized match), or -1.
    int find_sample(cplx z) const {
        auto it = index_.find(position_key(z, h));
        return it == index_.end() ? -1 : int(it->second);
    }

    bool has_sample(cplx z) const { return find_sample(z) >= 0; }

    int component_count() const {
        int m = -1;
        for (int c : component_labels) m = std::max(m, c);
        return m + 1;
    }

    void rebuild_index() {
        index_.clear();
        index_.reserve(samples.size() * 2);
        for (std::size_t i = 0; i < samples.size(); ++i)
            index_.emplace(position_key(samples[i].pos, h), i);
    }

private:
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

// ----------------------------------------------------------------------------
// Spatial hash over sample positions: ball queries and nearest-sample distance.
// ----------------------------------------------------------------------------

class SpatialHash {
public:
    SpatialHash() = default;
    SpatialHash(const std::vector<Sample>& samples, double cell) : cell_(cell) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            grid_[key(samples[i].pos)].push_back(i);
        for (auto& [k, v] : grid_) std::sort(v.begin(), v.end());
        points_.reserve(samples.size());
        for (const auto& s : samples) points_.push_back(s.pos);
    }
    explicit SpatialHash(const DiscretizedCompact& k)
        : SpatialHash(k.samples, std::max(k.h * 2.0, 1e-12)) {}

    bool empty() const { return points_.empty(); }

    template <class F>
    void for_ball(cplx z, double r, F&& f) const {
        if (points_.empty()) return;
        auto [cx, cy] = cell_of(z);
        int span = int(std::ceil(r / cell_)) + 1;
        for (int dy = -span; dy <= span; ++dy)
            for (int dx = -span; dx <= span; ++dx) {
                auto it = grid_.find(pack(cx + dx, cy + dy));
                if (it == grid_.end()) continue;
                for (std::size_t i : it->second)
                    if (std::abs(points_[i] - z) <= r) f(i);
            }
    }

    /// Distance to the nearest stored point (infinity when empty).
    double nearest_distance(cplx z) const {
        if (points_.empty()) return std::numeric_limits<double>::infinity();
        auto [cx, cy] = cell_of(z);
        double best = std::numeric_limits<double>::infinity();
        int found_ring = -1;
        for (int ring = 0;; ++ring) {
            bool met_any = false;
            for (int dy = -ring; dy <= ring; ++dy)
                for (int dx = -ring; dx <= ring; ++dx) {
                    if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
                    auto it = grid_.find(pack(cx + dx, cy + dy));
                    if (it == grid_.end()) continue;
                    met_any = true;
                    for (std::size_t i : it->second)
                        best = std::min(best, std::abs(points_[i] - z));
                }
            if (met_any && found_ring < 0) found_ring = ring;
            // Cells in ring k are at least (k-1)*cell away; once that exceeds
            // the best distance no further ring can improve it.
            if (found_ring >= 0 && double(ring) * cell_ > best) return best;
        }
    }

    int nearest_index(cplx z) const {
        if (points_.empty()) return -1;
        double r = std::max(nearest_distance(z) * 1.0001, cell_ * 1e-9);
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for_ball(z, r, [&](std::size_t i) {
            double d = std::abs(points_[i] - z);
            if (d < bd - 1e-15 || (std::abs(d - bd) <= 1e-15 && int(i) < best)) {
                bd = d;
                best = int(i);
            }
        });
        return best;
    }

private:
    double diameter_bound(cplx) const { return 1e9; }
    std::pair<int, int> cell_of(cplx z) const {
        return {int(std::floor(z.real() / cell_)), int(std::floor(z.imag() / cell_))};
    }
    static std::uint64_t pack(int x, int y) {
        return (std::uint64_t(std::uint32_t(x)) << 32) | std::uint64_t(std::uint32_t(y));
    }
    std::uint64_t key(cplx z) const {
        auto [x, y] = cell_of(z);
        return pack(x, y);
    }

    double cell_ = 1.0;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid_;
    std::vector<cplx> points_;
};

// ----------------------------------------------------------------------------
// Component labeling: graph connectivity of samples at radius 2h.
// ----------------------------------------------------------------------------

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

inline std::vector<int> label_components(const std::vector<Sample>& samples, double h) {
    detail::UnionFind uf(samples.size());
    SpatialHash hash(samples, std::max(2.0 * h, 1e-12));
    for (std::size_t i = 0; i < samples.size(); ++i)
        hash.for_ball(samples[i].pos, 2.0 * h + 1e-12 * h, [&](std::size_t j) {
            if (j != i) uf.unite(i, j);
        });
    std::vector<int> labels(samples.size(), -1);
    std::map<std::size_t, int> canon;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::size_t root = uf.find(i);
        auto it = canon.find(root);
        if (it == canon.end()) it = canon.emplace(root, int(canon.size())).first;
        labels[i] = it->second;
    }
    return labels;
}

inline void finalize_compact(DiscretizedCompact& k) {
    k.component_labels = label_components(k.samples, k.h);
    k.rebuild_index();
}

// ----------------------------------------------------------------------------
// build_compact
// ----------------------------------------------------------------------------

inline DiscretizedCompact build_compact(std::vector<SetPrimitive> primitives, double h) {
    require(h > 0.0, "build_compact: h must be > 0");
    DiscretizedCompact k;
    k.h = h;
    k.primitives = std::make_shared<PrimitiveSet>(std::move(primitives), h);
    const PrimitiveSet& ps = *k.primitives;
    if (ps.empty()) {
        finalize_compact(k);
        return k;
    }

    // Bounding box over all primitives.
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    auto grow = [&](cplx z, double r) {
        x0 = std::min(x0, z.real() - r);
        x1 = std::max(x1, z.real() + r);
        y0 = std::min(y0, z.imag() - r);
        y1 = std::max(y1, z.imag() + r);
    };
    for (const auto& p : ps.primitives()) {
        if (const auto* d = std::get_if<DiskPrimitive>(&p)) grow(d->center, d->radius);
        else if (const auto* r = std::get_if<RectanglePrimitive>(&p)) {
            grow(r->lo, 0);
            grow(r->hi, 0);
        } else if (const auto* a = std::get_if<PolylinePrimitive>(&p)) {
            for (cplx v : a->vertices) grow(v, 0);
        } else {
            auto poly = polygonize(std::get<SmoothBoundaryPrimitive>(p), h);
            for (cplx v : poly.pts) grow(v, 0);
        }
    }

    const bool area = ps.has_area();
    if (area) {
        // Lattice points whose cell meets the 2D region; weight = clipped cell
        // area by 4x4 supersampling.
        long i0 = long(std::floor(x0 / h)) - 1, i1 = long(std::ceil(x1 / h)) + 1;
        long j0 = long(std::floor(y0 / h)) - 1, j1 = long(std::ceil(y1 / h)) + 1;
        for (long j = j0; j <= j1; ++j) {
            for (long i = i0; i <= i1; ++i) {
                cplx z{double(i) * h, double(j) * h};
                int inside = 0;
                for (int sy = 0; sy < 4; ++sy)
                    for (int sx = 0; sx < 4; ++sx) {
                        cplx q{z.real() + ((sx + 0.5) / 4.0 - 0.5) * h,
                               z.imag() + ((sy + 0.5) / 4.0 - 0.5) * h};
                        if (ps.contains(q, 0.0)) ++inside;
                    }
                bool center_in = ps.contains(z, 0.0);
                if (inside == 0 && !center_in) continue;
                Sample s;
                s.pos = z;
                s.weight = h * h * double(inside) / 16.0;
                s.is_interior = ps.interior_contains(z);
                k.samples.push_back(s);
            }
        }
    }

    // Arc samples along polylines (arclength spacing h, endpoints included).
    {
        std::unordered_map<std::uint64_t, char> seen;
        for (const auto& s : k.samples) seen.emplace(position_key(s.pos, h), 1);
        for (const auto& p : ps.primitives()) {
            const auto* a = std::get_if<PolylinePrimitive>(&p);
            if (!a) continue;
            double total = 0.0;
            for (std::size_t i = 0; i + 1 < a->vertices.size(); ++i)
                total += std::abs(a->vertices[i + 1] - a->vertices[i]);
            int n = std::max(1, int(std::round(total / h)));
            double step = total / n;
            std::size_t seg = 0;
            double seg_used = 0.0;
            for (int m = 0; m <= n; ++m) {
                double target = std::min(step * m, total);
                while (seg + 2 < a->vertices.size() &&
                       seg_used + std::abs(a->vertices[seg + 1] - a->vertices[seg]) <
                           target - 1e-15) {
                    seg_used += std::abs(a->vertices[seg + 1] - a->vertices[seg]);
                    ++seg;
                }
                cplx d = a->vertices[seg + 1] - a->vertices[seg];
                double t = (target - seg_used) / std::abs(d);
                Sample s;
                s.pos = (m == n) ? a->vertices.back() : a->vertices[seg] + std::min(t, 1.0) * d;
                if (m == 0) s.pos = a->vertices.front();
                s.weight = 0.0;
                s.is_interior = false;
                if (seen.emplace(position_key(s.pos, h), 1).second) k.samples.push_back(s);
            }
        }
    }

    // Boundary samples with unit tangents.
    for (const auto& p : ps.primitives()) {
        if (const auto* d = std::get_if<DiskPrimitive>(&p)) {
            int n = std::max(16, int(std::ceil(2.0 * kPi * d->radius / h)));
            for (int m = 0; m < n; ++m) {
                double a = 2.0 * kPi * m / n;
                cplx u = std::polar(1.0, a);
                k.boundary_samples.push_back({d->center + d->radius * u, cplx{-u.imag(), u.real()}});
            }
        } else if (const auto* r = std::get_if<RectanglePrimitive>(&p)) {
            cplx c[4] = {r->lo, {r->hi.real(), r->lo.imag()}, r->hi, {r->lo.real(), r->hi.imag()}};
            for (int e = 0; e < 4; ++e) {
                cplx a = c[e], b = c[(e + 1) % 4];
                cplx t = (b - a) / std::abs(b - a);
                int n = std::max(2, int(std::ceil(std::abs(b - a) / h)));
                for (int m = 0; m < n; ++m)
                    k.boundary_samples.push_back({a + (b - a) * (double(m) / n), t});
            }
        } else if (const auto* a = std::get_if<PolylinePrimitive>(&p)) {
            for (std::size_t i = 0; i + 1 < a->vertices.size(); ++i) {
                cplx d = a->vertices[i + 1] - a->vertices[i];
                cplx t = d / std::abs(d);
                int n = std::max(1, int(std::ceil(std::abs(d) / h)));
                for (int m = 0; m < n; ++m)
                    k.boundary_samples.push_back({a->vertices[i] + d * (double(m) / n), t});
            }
        } else {
            const auto& s = std::get<SmoothBoundaryPrimitive>(p);
            auto poly = polygonize(s, h);
            std::size_t n = poly.pts.size();
            for (std::size_t m = 0; m < n; ++m) {
                cplx prev = poly.pts[(m + n - 1) % n], next = poly.pts[(m + 1) % n];
                cplx t = next - prev;
                k.boundary_samples.push_back({poly.pts[m], t / std::abs(t)});
            }
        }
    }

    finalize_compact(k);
    return k;
}

// ----------------------------------------------------------------------------
// Derived compacts
// ----------------------------------------------------------------------------

/// Subset of samples selected by a predicate on sample index. Boundary samples
/// are kept when within keep_boundary_radius of a kept sample (0 drops all).
template <class Pred>
DiscretizedCompact restrict_compact(const DiscretizedCompact& k, Pred&& keep,
                                    double keep_boundary_radius = 0.0) {
    DiscretizedCompact out;
    out.h = k.h;
    out.primitives = k.primitives;
    for (std::size_t i = 0; i < k.samples.size(); ++i)
        if (keep(i)) out.samples.push_back(k.samples[i]);
    if (keep_boundary_radius > 0.0 && !out.samples.empty()) {
        SpatialHash hash(out.samples, 2.0 * k.h);
        for (const auto& b : k.boundary_samples)
            if (hash.nearest_distance(b.pos) <= keep_boundary_radius)
                out.boundary_samples.push_back(b);
    }
    finalize_compact(out);
    return out;
}

/// Samples of a shared with b (by position). Weights become the min of the two.
inline DiscretizedCompact intersect_compact(const DiscretizedCompact& a,
                                            const DiscretizedCompact& b) {
    require(std::abs(a.h - b.h) < 1e-15, "intersect: mismatched h");
    DiscretizedCompact out;
    out.h = a.h;
    for (const auto& s : a.samples) {
        int j = b.find_sample(s.pos);
        if (j < 0) continue;
        Sample q = s;
        q.weight = std::min(s.weight, b.samples[j].weight);
        q.is_interior = s.is_interior && b.samples[j].is_interior;
        out.samples.push_back(q);
    }
    finalize_compact(out);
    return out;
}

/// Union by sample position; duplicate positions keep the larger weight.
inline DiscretizedCompact union_compact(const DiscretizedCompact& a,
                                        const DiscretizedCompact& b) {
    require(std::abs(a.h - b.h) < 1e-15, "union: mismatched h");
    DiscretizedCompact out;
    out.h = a.h;
    out.samples = a.samples;
    out.rebuild_index();
    for (const auto& s : b.samples) {
        int j = out.find_sample(s.pos);
        if (j >= 0) {
            out.samples[j].weight = std::max(out.samples[j].weight, s.weight);
            out.samples[j].is_interior = out.samples[j].is_interior || s.is_interior;
        } else {
            out.samples.push_back(s);
        }
    }
    out.boundary_samples = a.boundary_samples;
    out.boundary_samples.insert(out.boundary_samples.end(), b.boundary_samples.begin(),
                                b.boundary_samples.end());
    finalize_compact(out);
    return out;
}

/// Lattice compact of all points within radius r of k's samples.
inline DiscretizedCompact inflate_compact(const DiscretizedCompact& k, double r) {
    DiscretizedCompact out;
    out.h = k.h;
    if (k.empty()) {
        finalize_compact(out);
        return out;
    }
    SpatialHash hash(k);
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : k.samples) {
        x0 = std::min(x0, s.pos.real());
        x1 = std::max(x1, s.pos.real());
        y0 = std::min(y0, s.pos.imag());
        y1 = std::max(y1, s.pos.imag());
    }
    double h = k.h;
    long i0 = long(std::floor((x0 - r) / h)) - 1, i1 = long(std::ceil((x1 + r) / h)) + 1;
    long j0 = long(std::floor((y0 - r) / h)) - 1, j1 = long(std::ceil((y1 + r) / h)) + 1;
    for (long j = j0; j <= j1; ++j)
        for (long i = i0; i <= i1; ++i) {
            cplx z{double(i) * h, double(j) * h};
            double d = hash.nearest_distance(z);
            if (d > r) continue;
            Sample s;
            s.pos = z;
            s.weight = h * h;
            s.is_interior = d <= r - h;
            out.samples.push_back(s);
        }
    finalize_compact(out);
    return out;
}

/// Per-component sample index lists, ordered by label.
inline std::vector<std::vector<std::size_t>> component_index_sets(const DiscretizedCompact& k) {
    std::vector<std::vector<std::size_t>> out(std::max(0, k.component_count()));
    for (std::size_t i = 0; i < k.samples.size(); ++i)
        out[k.component_labels[i]].push_back(i);
    return out;
}

}  // namespace holopatch

#endif
