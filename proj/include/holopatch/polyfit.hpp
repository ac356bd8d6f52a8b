#ifndef HOLOPATCH_POLYFIT_HPP
#define HOLOPATCH_POLYFIT_HPP

#include <functional>

#include "holopatch/compact.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// Least-squares holomorphic fitting in a scaled monomial (optionally Laurent)
// basis, with exact-value constraints folded in through a Lagrange offset:
//     p(z) = L(z) + W(z) q(z),   W(z) = prod (z - p_i),
// where L interpolates the constraints and q is fit to (data - L)/W with
// weights |W|. Used by the approximation oracles and the zero-dimensional
// pipeline; degree escalation stops when a sup-error target is met.
// ----------------------------------------------------------------------------

struct HolomorphicFit {
    cplx center{0, 0};
    double scale = 1.0;
    std::vector<cplx> coeff;       // q coefficients, basis ((z-c)/s)^k
    std::vector<cplx> pole;        // optional Laurent pole points
    std::vector<cplx> pole_coeff;  // per pole: coefficients of (s_p/(z-p))^k, k=1..m
    double pole_scale = 1.0;
    std::vector<cplx> constraints_pts;
    std::vector<cplx> constraints_vals;
    int degree = 0;

    cplx eval(cplx z) const {
        cplx w{1.0, 0.0};
        cplx l{0.0, 0.0};
        if (!constraints_pts.empty()) {
            // Newton-free: direct Lagrange on the (few) constraint points.
            for (std::size_t i = 0; i < constraints_pts.size(); ++i) {
                cplx term = constraints_vals[i];
                for (std::size_t j = 0; j < constraints_pts.size(); ++j) {
                    if (j == i) continue;
                    term *= (z - constraints_pts[j]) / (constraints_pts[i] - constraints_pts[j]);
                }
                l += term;
            }
            for (cplx p : constraints_pts) w *= (z - p);
        }
        cplx u = (z - center) / scale;
        cplx q{0.0, 0.0};
        cplx m{1.0, 0.0};
        for (cplx c : coeff) {
            q += c * m;
            m *= u;
        }
        for (std::size_t pi = 0; pi < pole.size(); ++pi) {
            cplx inv = pole_scale / (z - pole[pi]);
            cplx acc{0.0, 0.0};
            cplx pw = inv;
            std::size_t m_per = pole_coeff.size() / std::max<std::size_t>(1, pole.size());
            for (std::size_t k = 0; k < m_per; ++k) {
                acc += pole_coeff[pi * m_per + k] * pw;
                pw *= inv;
            }
            q += acc;
        }
        return l + w * q;
    }
};

namespace detail {

/// Least squares by modified Gram-Schmidt QR with one reorthogonalization pass.
inline std::vector<cplx> ls_solve(std::vector<std::vector<cplx>>& cols, std::vector<cplx> rhs) {
    std::size_t n = cols.size();
    std::size_t m = rhs.size();
    std::vector<std::vector<cplx>> q(n);
    std::vector<std::vector<cplx>> r(n, std::vector<cplx>(n, cplx{0, 0}));
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<cplx> v = cols[j];
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 0; i < j; ++i) {
                cplx dot{0, 0};
                for (std::size_t k = 0; k < m; ++k) dot += std::conj(q[i][k]) * v[k];
                r[i][j] += dot;
                for (std::size_t k = 0; k < m; ++k) v[k] -= dot * q[i][k];
            }
        double nrm = 0.0;
        for (cplx x : v) nrm += std::norm(x);
        nrm = std::sqrt(nrm);
        r[j][j] = nrm;
        if (nrm < 1e-14) {
            // Dependent column; zero it so the coefficient comes out 0.
            for (auto& x : v) x = 0.0;
            r[j][j] = 1.0;
        } else {
            for (auto& x : v) x /= nrm;
        }
        q[j] = std::move(v);
    }
    std::vector<cplx> qtb(n, cplx{0, 0});
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < m; ++k) qtb[j] += std::conj(q[j][k]) * rhs[k];
    std::vector<cplx> x(n, cplx{0, 0});
    for (std::size_t j = n; j-- > 0;) {
        cplx s = qtb[j];
        for (std::size_t i = j + 1; i < n; ++i) s -= r[j][i] * x[i];
        x[j] = s / r[j][j];
    }
    return x;
}

}  // namespace detail

struct FitRequest {
    std::vector<cplx> points;         // fit samples
    std::vector<cplx> values;         // data at fit samples
    std::vector<cplx> constraint_pts; // exact-value constraints
    std::vector<cplx> constraint_vals;
    std::vector<cplx> poles;          // Laurent poles (one per complement hole)
    int degree = 4;
};

inline HolomorphicFit fit_holomorphic(const FitRequest& req) {
    require(req.points.size() == req.values.size(), "fit: point/value mismatch");
    require(!req.points.empty(), "fit: no samples");
    HolomorphicFit fit;
    fit.constraints_pts = req.constraint_pts;
    fit.constraints_vals = req.constraint_vals;
    fit.pole = req.poles;
    fit.degree = req.degree;

    KahanSumC cacc;
    for (cplx z : req.points) cacc.add(z);
    fit.center = cacc.value() / double(req.points.size());
    fit.scale = 1e-12;
    for (cplx z : req.points) fit.scale = std::max(fit.scale, std::abs(z - fit.center));
    double pole_dist = 1e300;
    for (cplx p : req.poles)
        for (cplx z : req.points) pole_dist = std::min(pole_dist, std::abs(z - p));
    fit.pole_scale = req.poles.empty() ? 1.0 : pole_dist;

    // Residual data after removing the constraint interpolant, divided by W.
    std::size_t m = req.points.size();
    std::vector<cplx> rhs(m);
    std::vector<double> wmag(m);
    for (std::size_t k = 0; k < m; ++k) {
        cplx z = req.points[k];
        cplx l{0, 0}, w{1, 0};
        for (std::size_t i = 0; i < req.constraint_pts.size(); ++i) {
            cplx term = req.constraint_vals[i];
            for (std::size_t j = 0; j < req.constraint_pts.size(); ++j) {
                if (j == i) continue;
                term *= (z - req.constraint_pts[j]) / (req.constraint_pts[i] - req.constraint_pts[j]);
            }
            l += term;
        }
        for (cplx p : req.constraint_pts) w *= (z - p);
        double mag = std::abs(w);
        wmag[k] = mag;
        rhs[k] = (mag < 1e-12 * std::pow(fit.scale, double(req.constraint_pts.size())))
                     ? cplx{0, 0}
                     : (req.values[k] - l) / w;
    }
    // Weight rows by |W| so the fit minimizes the true residual metric.
    int ncols = req.degree + 1 + int(req.poles.size()) * req.degree;
    std::vector<std::vector<cplx>> cols;
    cols.assign(std::size_t(ncols), std::vector<cplx>(m));
    for (std::size_t k = 0; k < m; ++k) {
        double rw = req.constraint_pts.empty() ? 1.0 : std::max(wmag[k], 1e-12);
        cplx u = (req.points[k] - fit.center) / fit.scale;
        cplx mono{1.0, 0.0};
        for (int d = 0; d <= req.degree; ++d) {
            cols[d][k] = mono * rw;
            mono *= u;
        }
        int cc = req.degree + 1;
        for (std::size_t pi = 0; pi < req.poles.size(); ++pi) {
            cplx inv = fit.pole_scale / (req.points[k] - req.poles[pi]);
            cplx pw = inv;
            for (int d = 0; d < req.degree; ++d) {
                cols[cc++][k] = pw * rw;
                pw *= inv;
            }
        }
        rhs[k] *= rw;
    }
    auto x = detail::ls_solve(cols, rhs);
    fit.coeff.assign(x.begin(), x.begin() + req.degree + 1);
    if (!req.poles.empty())
        fit.pole_coeff.assign(x.begin() + req.degree + 1, x.end());
    return fit;
}

struct EscalationResult {
    HolomorphicFit fit;
    double achieved = 0.0;
    bool met_target = false;
};

/// Escalate the degree until the sup error over (points, values) meets target.
inline EscalationResult fit_holomorphic_escalating(FitRequest req, double target, int max_degree) {
    EscalationResult out;
    double best = std::numeric_limits<double>::infinity();
    for (int d = 0; d <= max_degree; d += (d < 8 ? 2 : 4)) {
        req.degree = d;
        auto f = fit_holomorphic(req);
        double err = 0.0;
        for (std::size_t k = 0; k < req.points.size(); ++k)
            err = std::max(err, std::abs(f.eval(req.points[k]) - req.values[k]));
        if (err < best) {
            best = err;
            out.fit = f;
            out.achieved = err;
        }
        if (best <= target) {
            out.met_target = true;
            return out;
        }
    }
    out.met_target = best <= target;
    return out;
}

/// Flood-fill check that the complement of the sample set is connected at
/// resolution h (no enclosed holes). Pole points are needed otherwise.
inline bool complement_connected(const DiscretizedCompact& k, double margin_cells = 3.0) {
    if (k.empty()) return true;
    double h = k.h;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : k.samples) {
        x0 = std::min(x0, s.pos.real());
        x1 = std::max(x1, s.pos.real());
        y0 = std::min(y0, s.pos.imag());
        y1 = std::max(y1, s.pos.imag());
    }
    long gx0 = long(std::floor(x0 / h)) - long(margin_cells);
    long gy0 = long(std::floor(y0 / h)) - long(margin_cells);
    long nx = long(std::ceil(x1 / h)) + long(margin_cells) - gx0 + 1;
    long ny = long(std::ceil(y1 / h)) + long(margin_cells) - gy0 + 1;
    std::vector<char> occupied(std::size_t(nx) * ny, 0), seen(std::size_t(nx) * ny, 0);
    SpatialHash hash(k);
    for (long j = 0; j < ny; ++j)
        for (long i = 0; i < nx; ++i) {
            cplx z{double(gx0 + i) * h, double(gy0 + j) * h};
            if (hash.nearest_distance(z) <= h * 1.01)
                occupied[std::size_t(j) * nx + i] = 1;
        }
    // BFS from the frame.
    std::vector<std::pair<long, long>> queue;
    auto push = [&](long i, long j) {
        if (i < 0 || j < 0 || i >= nx || j >= ny) return;
        std::size_t idx = std::size_t(j) * nx + i;
        if (occupied[idx] || seen[idx]) return;
        seen[idx] = 1;
        queue.emplace_back(i, j);
    };
    for (long i = 0; i < nx; ++i) {
        push(i, 0);
        push(i, ny - 1);
    }
    for (long j = 0; j < ny; ++j) {
        push(0, j);
        push(nx - 1, j);
    }
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        auto [i, j] = queue[qi];
        push(i + 1, j);
        push(i - 1, j);
        push(i, j + 1);
        push(i, j - 1);
    }
    for (long j = 0; j < ny; ++j)
        for (long i = 0; i < nx; ++i) {
            std::size_t idx = std::size_t(j) * nx + i;
            if (!occupied[idx] && !seen[idx]) return false;
        }
    return true;
}

/// Centroids of the enclosed complement pockets (Laurent pole points).
inline std::vector<cplx> complement_hole_centers(const DiscretizedCompact& k) {
    std::vector<cplx> out;
    if (k.empty()) return out;
    double h = k.h;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : k.samples) {
        x0 = std::min(x0, s.pos.real());
        x1 = std::max(x1, s.pos.real());
        y0 = std::min(y0, s.pos.imag());
        y1 = std::max(y1, s.pos.imag());
    }
    long gx0 = long(std::floor(x0 / h)) - 3, gy0 = long(std::floor(y0 / h)) - 3;
    long nx = long(std::ceil(x1 / h)) + 3 - gx0 + 1, ny = long(std::ceil(y1 / h)) + 3 - gy0 + 1;
    std::vector<int> state(std::size_t(nx) * ny, 0);  // 0 free, 1 occupied, 2 outside
    SpatialHash hash(k);
    for (long j = 0; j < ny; ++j)
        for (long i = 0; i < nx; ++i)
            if (hash.nearest_distance(cplx{double(gx0 + i) * h, double(gy0 + j) * h}) <= h * 1.01)
                state[std::size_t(j) * nx + i] = 1;
    std::vector<std::pair<long, long>> queue;
    auto push = [&](long i, long j) {
        if (i < 0 || j < 0 || i >= nx || j >= ny) return;
        std::size_t idx = std::size_t(j) * nx + i;
        if (state[idx] != 0) return;
        state[idx] = 2;
        queue.emplace_back(i, j);
    };
    for (long i = 0; i < nx; ++i) {
        push(i, 0);
        push(i, ny - 1);
    }
    for (long j = 0; j < ny; ++j) {
        push(0, j);
        push(nx - 1, j);
    }
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        auto [i, j] = queue[qi];
        push(i + 1, j);
        push(i - 1, j);
        push(i, j + 1);
        push(i, j - 1);
    }
    // Remaining free cells form pockets; label them and emit centroids.
    for (long j = 0; j < ny; ++j)
        for (long i = 0; i < nx; ++i) {
            if (state[std::size_t(j) * nx + i] != 0) continue;
            std::vector<std::pair<long, long>> pocket{{i, j}};
            state[std::size_t(j) * nx + i] = 3;
            for (std::size_t qi = 0; qi < pocket.size(); ++qi) {
                auto [pi, pj] = pocket[qi];
                for (auto [di, dj] : {std::pair<long, long>{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                    long ni = pi + di, nj = pj + dj;
                    if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
                    std::size_t idx = std::size_t(nj) * nx + ni;
                    if (state[idx] == 0) {
                        state[idx] = 3;
                        pocket.emplace_back(ni, nj);
                    }
                }
            }
            KahanSumC c;
            for (auto [pi, pj] : pocket)
                c.add(cplx{double(gx0 + pi) * h, double(gy0 + pj) * h});
            out.push_back(c.value() / double(pocket.size()));
        }
    return out;
}

}  // namespace holopatch

#endif
