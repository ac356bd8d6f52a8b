#ifndef HOLOPATCH_COUSIN_HPP
#define HOLOPATCH_COUSIN_HPP

#include "holopatch/cauchy.hpp"
#include "holopatch/good_pair.hpp"
#include "holopatch/interpolation.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// The bounded splitting operators T1, T2 of the additive Cousin problem:
//
//   T1 f = (1 - chi) f + Lambda_f - q_f      on K1,
//   T2 f =      chi  f - Lambda_f + q_f      on K2,
//
// with lambda = f * dbar(chi), Lambda_f its Cauchy transform over K12, and
// q_f the Lagrange polynomial matching Lambda_f on P. Products with f are
// extended by zero where f is undefined. T1 f + T2 f = f holds exactly on K12
// by cancellation.
// ----------------------------------------------------------------------------

/// Cauchy transform with a fixed source band (samples of K12 where dbar chi
/// and the weight are nonzero) and a fixed target list. Near-singular cells
/// carry precomputed closed-form coefficients.
class BandTransform {
public:
    BandTransform(const GoodPairContext& ctx, std::vector<cplx> targets)
        : targets_(std::move(targets)) {
        const auto& k12 = *ctx.k12;
        const double h = k12.h;
        for (std::size_t i = 0; i < k12.size(); ++i) {
            cplx dchi = ctx.dbar_chi_at(k12.pos(i));
            double w = k12.samples[i].weight;
            if (w == 0.0 || std::abs(dchi) < 1e-300) continue;
            band_index_.push_back(i);
            band_pos_.push_back(k12.pos(i));
            band_factor_.push_back(dchi * w / kPi);
            band_cellfactor_.push_back(dchi * (w / (h * h)) / kPi);
        }
        // Per-target near-source corrections.
        std::vector<Sample> band_samples;
        band_samples.reserve(band_pos_.size());
        for (cplx z : band_pos_) band_samples.push_back({z, 0.0, false});
        SpatialHash hash(band_samples, std::max(2.0 * h, 1e-12));
        near_.resize(targets_.size());
        for (std::size_t t = 0; t < targets_.size(); ++t) {
            cplx z = targets_[t];
            std::vector<std::size_t> idx;
            hash.for_ball(z, 2.0 * h, [&](std::size_t b) { idx.push_back(b); });
            std::sort(idx.begin(), idx.end());
            for (std::size_t b : idx) {
                cplx rel = z - band_pos_[b];
                bool on_edge = std::abs(std::abs(rel.real()) - 0.5 * h) < 1e-12 * h ||
                               std::abs(std::abs(rel.imag()) - 0.5 * h) < 1e-12 * h;
                cplx coeff;
                if (on_edge) {
                    coeff = std::abs(rel) >= 0.5 * h ? band_factor_[b] / rel : cplx{0.0, 0.0};
                } else {
                    cplx corners[4] = {rel - cplx{-0.5 * h, -0.5 * h}, rel - cplx{0.5 * h, -0.5 * h},
                                       rel - cplx{0.5 * h, 0.5 * h}, rel - cplx{-0.5 * h, 0.5 * h}};
                    coeff = band_cellfactor_[b] * detail::cell_integral_inv(corners);
                }
                near_[t].emplace_back(b, coeff);
            }
        }
    }

    std::size_t band_size() const { return band_index_.size(); }
    const std::vector<std::size_t>& band_index() const { return band_index_; }
    const std::vector<cplx>& targets() const { return targets_; }

    /// Lambda values at the targets for band data f (f indexed like band_index).
    std::vector<cplx> apply(const std::vector<cplx>& f_band) const {
        std::vector<cplx> out(targets_.size());
        for (std::size_t t = 0; t < targets_.size(); ++t) {
            cplx z = targets_[t];
            const auto& near = near_[t];
            KahanSumC acc;
            std::size_t np = 0;
            for (std::size_t b = 0; b < band_pos_.size(); ++b) {
                if (np < near.size() && near[np].first == b) {
                    acc.add(near[np].second * f_band[b]);
                    ++np;
                    continue;
                }
                acc.add(band_factor_[b] * f_band[b] / (z - band_pos_[b]));
            }
            out[t] = acc.value();
        }
        return out;
    }

private:
    std::vector<cplx> targets_;
    std::vector<std::size_t> band_index_;  // into K12 samples
    std::vector<cplx> band_pos_;
    std::vector<cplx> band_factor_;
    std::vector<cplx> band_cellfactor_;
    std::vector<std::vector<std::pair<std::size_t, cplx>>> near_;
};

struct AdditiveSplit {
    SampledMap t1;  // on K1
    SampledMap t2;  // on K2
    SampledMap lambda;  // f * dbar(chi) on K12
    LagrangePolynomial q;
    double operator_norm_estimate = 0.0;
};

/// Shared machinery for repeated splits over the same good pair. Target lists:
/// all samples of K1 and K2 (K12 positions shared) plus the P points.
class AdditiveSplitter {
public:
    AdditiveSplitter(std::shared_ptr<const GoodPairContext> ctx, std::vector<cplx> p_points)
        : ctx_(std::move(ctx)), p_points_(std::move(p_points)) {
        const auto& c = *ctx_;
        require(int(p_points_.size()) <= kMaxInterpolationPoints, "split: too many P points");
        // A P point sampled by both compacts lies on the overlap and must be a
        // K12 sample; points off K are allowed (q still interpolates there).
        for (cplx p : p_points_)
            if (c.k1->find_sample(p) >= 0 && c.k2->find_sample(p) >= 0)
                require(c.k12->find_sample(p) >= 0, "split: P point on the overlap is not a K12 sample");

        // Unique target positions: K1 samples, then K2 samples not in K1,
        // then P points not sampled.
        std::vector<cplx> targets;
        k1_target_.resize(c.k1->size());
        for (std::size_t i = 0; i < c.k1->size(); ++i) {
            k1_target_[i] = targets.size();
            targets.push_back(c.k1->pos(i));
        }
        k2_target_.resize(c.k2->size());
        for (std::size_t i = 0; i < c.k2->size(); ++i) {
            int j = c.k1->find_sample(c.k2->pos(i));
            if (j >= 0) {
                k2_target_[i] = k1_target_[j];
            } else {
                k2_target_[i] = targets.size();
                targets.push_back(c.k2->pos(i));
            }
        }
        p_target_.resize(p_points_.size());
        for (std::size_t i = 0; i < p_points_.size(); ++i) {
            int j1 = c.k1->find_sample(p_points_[i]);
            if (j1 >= 0) {
                p_target_[i] = k1_target_[j1];
                continue;
            }
            int j2 = c.k2->find_sample(p_points_[i]);
            if (j2 >= 0) {
                p_target_[i] = k2_target_[j2];
                continue;
            }
            p_target_[i] = targets.size();
            targets.push_back(p_points_[i]);
        }
        transform_ = std::make_shared<BandTransform>(c, std::move(targets));

        // chi at K1/K2 samples and K12 membership, fixed per pair.
        chi1_.resize(c.k1->size());
        in12_1_.resize(c.k1->size());
        for (std::size_t i = 0; i < c.k1->size(); ++i) {
            chi1_[i] = c.chi_at(c.k1->pos(i));
            in12_1_[i] = c.k12->find_sample(c.k1->pos(i));
        }
        chi2_.resize(c.k2->size());
        in12_2_.resize(c.k2->size());
        for (std::size_t i = 0; i < c.k2->size(); ++i) {
            chi2_[i] = c.chi_at(c.k2->pos(i));
            in12_2_[i] = c.k12->find_sample(c.k2->pos(i));
        }
    }

    const GoodPairContext& ctx() const { return *ctx_; }
    const std::vector<cplx>& p_points() const { return p_points_; }

    /// Split a scalar map on K12. Vanishing at P is checked against tol_scale.
    AdditiveSplit split_scalar(const SampledMap& f, bool check_vanishing = true) const {
        const auto& c = *ctx_;
        require(f.codim() == 1, "split_scalar: scalar input expected");
        require(f.size() == c.k12->size(), "split_scalar: f must live on K12");
        double scale = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) scale = std::max(scale, std::abs(f.at(i, 0)));
        if (check_vanishing)
            for (cplx p : p_points_) {
                int i = c.k12->find_sample(p);
                if (i >= 0)
                    require(std::abs(f.at(i, 0)) <= 1e-9 * scale + 1e-14,
                            "split: f does not vanish at a P point");
            }

        // Band data and Lambda at all targets.
        const auto& band = transform_->band_index();
        std::vector<cplx> fb(band.size());
        for (std::size_t b = 0; b < band.size(); ++b) fb[b] = f.at(band[b], 0);
        std::vector<cplx> lam_t = transform_->apply(fb);

        // q_f interpolating Lambda at P.
        LagrangePolynomial q;
        if (!p_points_.empty()) {
            std::vector<cplx> vals(p_points_.size());
            for (std::size_t i = 0; i < p_points_.size(); ++i) vals[i] = lam_t[p_target_[i]];
            q = lagrange_interpolate_scalar(p_points_, vals);
        }

        AdditiveSplit out;
        out.q = q;
        out.t1 = SampledMap(c.k1, 1);
        for (std::size_t i = 0; i < c.k1->size(); ++i) {
            cplx part = in12_1_[i] >= 0 ? (1.0 - chi1_[i]) * f.at(in12_1_[i], 0) : cplx{0.0, 0.0};
            out.t1.at(i, 0) = part + lam_t[k1_target_[i]] - q.eval_scalar(c.k1->pos(i));
        }
        out.t2 = SampledMap(c.k2, 1);
        for (std::size_t i = 0; i < c.k2->size(); ++i) {
            cplx part = in12_2_[i] >= 0 ? chi2_[i] * f.at(in12_2_[i], 0) : cplx{0.0, 0.0};
            out.t2.at(i, 0) = part - lam_t[k2_target_[i]] + q.eval_scalar(c.k2->pos(i));
        }
        out.lambda = SampledMap(c.k12, 1);
        for (std::size_t b = 0; b < band.size(); ++b)
            out.lambda.at(band[b], 0) = f.at(band[b], 0) * c.dbar_chi_at(c.k12->pos(band[b]));
        double nf = std::max(scale, 1e-300);
        out.operator_norm_estimate = std::max(sup_norm(out.t1), sup_norm(out.t2)) / nf;
        return out;
    }

    /// Componentwise split of a C^m-valued map.
    std::pair<SampledMap, SampledMap> split_vector(const SampledMap& f,
                                                   bool check_vanishing = true) const {
        const auto& c = *ctx_;
        SampledMap t1(c.k1, f.codim()), t2(c.k2, f.codim());
        for (int j = 0; j < f.codim(); ++j) {
            auto s = split_scalar(f.component(j), check_vanishing);
            for (std::size_t i = 0; i < t1.size(); ++i) t1.at(i, j) = s.t1.at(i, 0);
            for (std::size_t i = 0; i < t2.size(); ++i) t2.at(i, j) = s.t2.at(i, 0);
        }
        return {std::move(t1), std::move(t2)};
    }

private:
    std::shared_ptr<const GoodPairContext> ctx_;
    std::vector<cplx> p_points_;
    std::shared_ptr<BandTransform> transform_;
    std::vector<std::size_t> k1_target_, k2_target_, p_target_;
    std::vector<double> chi1_, chi2_;
    std::vector<int> in12_1_, in12_2_;
};

/// P points usable with a pair: points sampled by K1 or K2 are kept snapped,
/// points off both compacts pass through, near-misses are rejected.
inline std::vector<cplx> usable_p_points(const GoodPairContext& ctx, const InterpolationSet& P) {
    std::vector<cplx> out;
    SpatialHash h1(*ctx.k1), h2(*ctx.k2);
    for (cplx p : P.points) {
        if (ctx.k1->find_sample(p) >= 0 || ctx.k2->find_sample(p) >= 0) {
            out.push_back(p);
            continue;
        }
        double d = std::min(h1.nearest_distance(p), h2.nearest_distance(p));
        require(d > std::max(P.snap_radius, ctx.h() * 0.51),
                "P point near the pair but not snapped to a sample");
        out.push_back(p);
    }
    return out;
}

/// One-shot interface per the operation contract.
inline AdditiveSplit split_additive(const SampledMap& f, std::shared_ptr<const GoodPairContext> ctx,
                                    const InterpolationSet& P) {
    auto pts = usable_p_points(*ctx, P);
    AdditiveSplitter sp(std::move(ctx), pts);
    return sp.split_scalar(f);
}

}  // namespace holopatch

#endif
