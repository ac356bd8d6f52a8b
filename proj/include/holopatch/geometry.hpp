#ifndef HOLOPATCH_GEOMETRY_HPP
#define HOLOPATCH_GEOMETRY_HPP

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "holopatch/core.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// Set primitives: disks, axis-aligned rectangles, polyline arcs, and smooth
// Jordan curves given by a parametric sampler. A compact is a union of these;
// a negatively oriented smooth curve carves a hole out of the smooth region.
// ----------------------------------------------------------------------------

struct DiskPrimitive {
    cplx center;
    double radius = 0.0;
};

struct RectanglePrimitive {
    cplx lo;  // min corner
    cplx hi;  // max corner
};

struct PolylinePrimitive {
    std::vector<cplx> vertices;  // open arc, consecutive vertices distinct
};

struct SmoothBoundaryPrimitive {
    /// Closed simple curve, parametrized over [0, 1).
    std::function<cplx(double)> curve;
    int orientation = +1;  // +1 filled region, -1 hole
    std::string name;      // for serialization ("circle", "ellipse")
    std::vector<double> params;
};

using SetPrimitive =
    std::variant<DiskPrimitive, RectanglePrimitive, PolylinePrimitive, SmoothBoundaryPrimitive>;

inline SetPrimitive make_disk(cplx c, double r) {
    require(r > 0.0 && is_finite(c), "disk: radius must be > 0 and center finite");
    return DiskPrimitive{c, r};
}

inline SetPrimitive make_rectangle(cplx a, cplx b) {
    cplx lo{std::min(a.real(), b.real()), std::min(a.imag(), b.imag())};
    cplx hi{std::max(a.real(), b.real()), std::max(a.imag(), b.imag())};
    require(hi.real() > lo.real() && hi.imag() > lo.imag(), "rectangle: degenerate corners");
    return RectanglePrimitive{lo, hi};
}

inline double segment_distance(cplx p, cplx a, cplx b) {
    cplx d = b - a;
    double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    double t = std::clamp(((p - a).real() * d.real() + (p - a).imag() * d.imag()) / len2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

inline bool segments_properly_intersect(cplx a, cplx b, cplx c, cplx d) {
    auto cross = [](cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); };
    double d1 = cross(b - a, c - a);
    double d2 = cross(b - a, d - a);
    double d3 = cross(d - c, a - c);
    double d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

inline SetPrimitive make_polyline(std::vector<cplx> vertices) {
    require(vertices.size() >= 2, "polyline: need at least two vertices");
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
        require(std::abs(vertices[i + 1] - vertices[i]) > 0.0, "polyline: repeated vertex");
    // Arc injectivity: reject self intersections between non-adjacent segments.
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
        for (std::size_t j = i + 2; j + 1 < vertices.size(); ++j)
            require(!segments_properly_intersect(vertices[i], vertices[i + 1], vertices[j],
                                                 vertices[j + 1]),
                    "polyline: self-intersecting");
    return PolylinePrimitive{std::move(vertices)};
}

inline SetPrimitive make_circle_boundary(cplx c, double r, int orientation) {
    require(r > 0.0, "circle: radius must be > 0");
    SmoothBoundaryPrimitive p;
    double sgn = orientation >= 0 ? 1.0 : -1.0;
    p.curve = [c, r, sgn](double t) {
        double a = 2.0 * kPi * t * sgn;
        return c + r * cplx{std::cos(a), std::sin(a)};
    };
    p.orientation = orientation >= 0 ? +1 : -1;
    p.name = "circle";
    p.params = {c.real(), c.imag(), r};
    return p;
}

inline SetPrimitive make_ellipse_boundary(cplx c, double a, double b, double angle,
                                          int orientation) {
    require(a > 0.0 && b > 0.0, "ellipse: semi-axes must be > 0");
    SmoothBoundaryPrimitive p;
    double sgn = orientation >= 0 ? 1.0 : -1.0;
    p.curve = [c, a, b, angle, sgn](double t) {
        double s = 2.0 * kPi * t * sgn;
        cplx q{a * std::cos(s), b * std::sin(s)};
        return c + q * std::polar(1.0, angle);
    };
    p.orientation = orientation >= 0 ? +1 : -1;
    p.name = "ellipse";
    p.params = {c.real(), c.imag(), a, b, angle};
    return p;
}

// ----------------------------------------------------------------------------
// Membership queries against a primitive list. The 2D region is
//   (union of disks and rectangles)  ∪  { total smooth winding >= 1 }
// and one-dimensional primitives contribute a proximity band of radius tol.
// ----------------------------------------------------------------------------

struct PolygonizedCurve {
    std::vector<cplx> pts;  // closed: pts.back() followed by pts.front()
    int orientation = +1;
};

inline PolygonizedCurve polygonize(const SmoothBoundaryPrimitive& p, double max_seg) {
    PolygonizedCurve out;
    out.orientation = p.orientation;
    // Estimate length with a coarse pass, then resample uniformly in parameter.
    int coarse = 256;
    double len = 0.0;
    cplx prev = p.curve(0.0);
    for (int i = 1; i <= coarse; ++i) {
        cplx q = p.curve(double(i % coarse) / coarse);
        len += std::abs(q - prev);
        prev = q;
    }
    int n = std::max(64, int(std::ceil(len / std::max(max_seg, 1e-12))));
    out.pts.resize(n);
    for (int i = 0; i < n; ++i) out.pts[i] = p.curve(double(i) / n);
    return out;
}

inline int winding_number(const PolygonizedCurve& c, cplx z) {
    int w = 0;
    std::size_t n = c.pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        cplx a = c.pts[i], b = c.pts[(i + 1) % n];
        if (a.imag() <= z.imag()) {
            if (b.imag() > z.imag() &&
                (b.real() - a.real()) * (z.imag() - a.imag()) -
                        (z.real() - a.real()) * (b.imag() - a.imag()) >
                    0)
                ++w;
        } else {
            if (b.imag() <= z.imag() &&
                (b.real() - a.real()) * (z.imag() - a.imag()) -
                        (z.real() - a.real()) * (b.imag() - a.imag()) <
                    0)
                --w;
        }
    }
    return w;
}

/// Geometry of a primitive list, with polygonized smooth curves cached for
/// membership and distance queries.
class PrimitiveSet {
public:
    PrimitiveSet() = default;
    PrimitiveSet(std::vector<SetPrimitive> prims, double h) : prims_(std::move(prims)), h_(h) {
        for (const auto& p : prims_)
            if (const auto* s = std::get_if<SmoothBoundaryPrimitive>(&p)) {
                polys_.push_back(polygonize(*s, h / 2.0));
                check_simple(polys_.back());
            }
    }

    const std::vector<SetPrimitive>& primitives() const { return prims_; }
    bool empty() const { return prims_.empty(); }

    bool has_area() const {
        for (const auto& p : prims_)
            if (!std::holds_alternative<PolylinePrimitive>(p)) return true;
        return false;
    }

    /// Closed membership in the 2D region (1D primitives use a band of radius tol).
    bool contains(cplx z, double band_tol) const {
        int smooth_winding = 0;
        bool any_smooth = false;
        for (std::size_t i = 0, si = 0; i < prims_.size(); ++i) {
            const auto& p = prims_[i];
            if (const auto* d = std::get_if<DiskPrimitive>(&p)) {
                if (std::abs(z - d->center) <= d->radius) return true;
            } else if (const auto* r = std::get_if<RectanglePrimitive>(&p)) {
                if (z.real() >= r->lo.real() && z.real() <= r->hi.real() &&
                    z.imag() >= r->lo.imag() && z.imag() <= r->hi.imag())
                    return true;
            } else if (const auto* a = std::get_if<PolylinePrimitive>(&p)) {
                for (std::size_t k = 0; k + 1 < a->vertices.size(); ++k)
                    if (segment_distance(z, a->vertices[k], a->vertices[k + 1]) <= band_tol)
                        return true;
            } else {
                // Orientation is baked into the traversal direction, so the
                // plain winding sum handles holes.
                any_smooth = true;
                smooth_winding += winding_number(polys_[si], z);
                ++si;
            }
        }
        if (any_smooth) {
            if (smooth_winding >= 1) return true;
            // Boundary points have ill-defined winding; use curve proximity.
            if (distance_to_boundary(z) <= band_tol) return true;
        }
        return false;
    }

    /// Strict interior membership of the 2D region.
    bool interior_contains(cplx z) const {
        if (!contains(z, 0.0)) return false;
        return distance_to_boundary(z) > 1e-9;
    }

    /// Inside the 2D region with a positive margin to every defining curve.
    /// A point sitting on one primitive's boundary never counts as strictly
    /// inside that primitive, which is what union-boundary filtering needs.
    bool strictly_inside(cplx z, double margin) const {
        std::size_t si = 0;
        int winding = 0;
        bool any_smooth = false;
        double smooth_dist = std::numeric_limits<double>::infinity();
        for (const auto& p : prims_) {
            if (const auto* d = std::get_if<DiskPrimitive>(&p)) {
                if (std::abs(z - d->center) < d->radius - margin) return true;
            } else if (const auto* r = std::get_if<RectanglePrimitive>(&p)) {
                if (z.real() > r->lo.real() + margin && z.real() < r->hi.real() - margin &&
                    z.imag() > r->lo.imag() + margin && z.imag() < r->hi.imag() - margin)
                    return true;
            } else if (std::holds_alternative<SmoothBoundaryPrimitive>(p)) {
                any_smooth = true;
                const auto& poly = polys_[si++];
                winding += winding_number(poly, z);
                std::size_t n = poly.pts.size();
                for (std::size_t k = 0; k < n; ++k)
                    smooth_dist = std::min(
                        smooth_dist, segment_distance(z, poly.pts[k], poly.pts[(k + 1) % n]));
            }
        }
        return any_smooth && winding >= 1 && smooth_dist > margin;
    }

    /// Distance to the union of all primitive boundary curves / arcs.
    double distance_to_boundary(cplx z) const {
        double best = std::numeric_limits<double>::infinity();
        std::size_t si = 0;
        for (const auto& p : prims_) {
            if (const auto* d = std::get_if<DiskPrimitive>(&p)) {
                best = std::min(best, std::abs(std::abs(z - d->center) - d->radius));
            } else if (const auto* r = std::get_if<RectanglePrimitive>(&p)) {
                cplx c[4] = {r->lo, {r->hi.real(), r->lo.imag()}, r->hi,
                             {r->lo.real(), r->hi.imag()}};
                for (int k = 0; k < 4; ++k)
                    best = std::min(best, segment_distance(z, c[k], c[(k + 1) % 4]));
            } else if (const auto* a = std::get_if<PolylinePrimitive>(&p)) {
                for (std::size_t k = 0; k + 1 < a->vertices.size(); ++k)
                    best = std::min(best, segment_distance(z, a->vertices[k], a->vertices[k + 1]));
            } else {
                const auto& poly = polys_[si++];
                std::size_t n = poly.pts.size();
                for (std::size_t k = 0; k < n; ++k)
                    best = std::min(best, segment_distance(z, poly.pts[k], poly.pts[(k + 1) % n]));
            }
        }
        return best;
    }

private:
    static void check_simple(const PolygonizedCurve& c) {
        // Coarse simplicity check on a decimated polygon (intersection tests
        // are O(n^2)); catches figure-eight style inputs.
        std::vector<cplx> q;
        std::size_t stride = std::max<std::size_t>(1, c.pts.size() / 256);
        for (std::size_t i = 0; i < c.pts.size(); i += stride) q.push_back(c.pts[i]);
        std::size_t n = q.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;
                require(!segments_properly_intersect(q[i], q[(i + 1) % n], q[j], q[(j + 1) % n]),
                        "smooth boundary: curve is not simple");
            }
    }

    std::vector<SetPrimitive> prims_;
    std::vector<PolygonizedCurve> polys_;
    double h_ = 0.0;
};

}  // namespace holopatch

#endif
