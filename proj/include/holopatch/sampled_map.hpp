#ifndef HOLOPATCH_SAMPLED_MAP_HPP
#define HOLOPATCH_SAMPLED_MAP_HPP

#include <functional>
#include <memory>
#include <vector>

#include "holopatch/compact.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// SampledMap: a map K -> C^m given by values at the samples of a compact.
// ----------------------------------------------------------------------------

class SampledMap {
public:
    SampledMap() = default;
    SampledMap(std::shared_ptr<const DiscretizedCompact> domain, int codim)
        : domain_(std::move(domain)), codim_(codim) {
        require(codim_ >= 1, "SampledMap: codomain dimension must be >= 1");
        values_.assign(domain_->size() * codim_, cplx{0.0, 0.0});
    }

    static SampledMap from_function(std::shared_ptr<const DiscretizedCompact> domain,
                                    const std::function<cplx(cplx)>& f) {
        SampledMap m(domain, 1);
        for (std::size_t i = 0; i < domain->size(); ++i) m.at(i, 0) = f(domain->pos(i));
        return m;
    }

    static SampledMap from_function_vec(
        std::shared_ptr<const DiscretizedCompact> domain, int codim,
        const std::function<std::vector<cplx>(cplx)>& f) {
        SampledMap m(domain, codim);
        for (std::size_t i = 0; i < domain->size(); ++i) {
            auto v = f(domain->pos(i));
            for (int j = 0; j < codim; ++j) m.at(i, j) = v[j];
        }
        return m;
    }

    const DiscretizedCompact& domain() const { return *domain_; }
    std::shared_ptr<const DiscretizedCompact> domain_ptr() const { return domain_; }
    int codim() const { return codim_; }
    std::size_t size() const { return domain_ ? domain_->size() : 0; }

    cplx& at(std::size_t sample, int comp) { return values_[sample * codim_ + comp]; }
    cplx at(std::size_t sample, int comp) const { return values_[sample * codim_ + comp]; }

    const std::vector<cplx>& raw() const { return values_; }
    std::vector<cplx>& raw() { return values_; }

    /// Value at a named point (must coincide with a sample).
    std::vector<cplx> value_at(cplx p) const {
        int i = domain_->find_sample(p);
        require(i >= 0, "SampledMap: point is not a sample of the domain");
        std::vector<cplx> v(codim_);
        for (int j = 0; j < codim_; ++j) v[j] = at(i, j);
        return v;
    }

    SampledMap component(int j) const {
        SampledMap out(domain_, 1);
        for (std::size_t i = 0; i < size(); ++i) out.at(i, 0) = at(i, j);
        return out;
    }

    SampledMap& operator+=(const SampledMap& o) {
        require(o.values_.size() == values_.size(), "SampledMap: size mismatch");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    SampledMap& operator-=(const SampledMap& o) {
        require(o.values_.size() == values_.size(), "SampledMap: size mismatch");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    SampledMap& operator*=(cplx s) {
        for (auto& v : values_) v *= s;
        return *this;
    }
    friend SampledMap operator+(SampledMap a, const SampledMap& b) { return a += b; }
    friend SampledMap operator-(SampledMap a, const SampledMap& b) { return a -= b; }
    friend SampledMap operator*(cplx s, SampledMap a) { return a *= s; }

private:
    std::shared_ptr<const DiscretizedCompact> domain_;
    int codim_ = 1;
    std::vector<cplx> values_;
};

/// Sup over samples of the max modulus of components.
inline double sup_norm(const SampledMap& f) {
    require(f.size() > 0, "sup_norm: empty domain");
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (int j = 0; j < f.codim(); ++j) m = std::max(m, std::abs(f.at(i, j)));
    return m;
}

// ----------------------------------------------------------------------------
// Discrete Cauchy-Riemann residual: (d/dx + i d/dy)/2 by centered differences
// at interior samples whose four lattice neighbors are present.
// ----------------------------------------------------------------------------

struct CrResidual {
    std::vector<double> per_sample;  // -1 where not eligible
    double max = 0.0;
    bool vacuous = true;   // no eligible samples (e.g. arcs)
    std::size_t eligible = 0;
};

/// Residual restricted to samples passing `mask` (mask may be empty = all).
inline CrResidual cr_residual(const SampledMap& f, const std::vector<bool>& mask = {}) {
    const auto& k = f.domain();
    CrResidual out;
    out.per_sample.assign(k.size(), -1.0);
    const double h = k.h;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        if (!k.samples[i].is_interior) continue;
        cplx z = k.pos(i);
        int xp = k.find_sample(z + cplx{h, 0.0});
        int xm = k.find_sample(z - cplx{h, 0.0});
        int yp = k.find_sample(z + cplx{0.0, h});
        int ym = k.find_sample(z - cplx{0.0, h});
        if (xp < 0 || xm < 0 || yp < 0 || ym < 0) continue;
        double worst = 0.0;
        for (int j = 0; j < f.codim(); ++j) {
            cplx dx = (f.at(xp, j) - f.at(xm, j)) / (2.0 * h);
            cplx dy = (f.at(yp, j) - f.at(ym, j)) / (2.0 * h);
            worst = std::max(worst, std::abs(0.5 * (dx + cplx{0.0, 1.0} * dy)));
        }
        out.per_sample[i] = worst;
        out.max = std::max(out.max, worst);
        ++out.eligible;
    }
    out.vacuous = (out.eligible == 0);
    return out;
}

}  // namespace holopatch

#endif
