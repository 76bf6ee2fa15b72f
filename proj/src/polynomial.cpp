#include "holoseries/polynomial.hpp"

#include "holoseries/errors.hpp"

#include <algorithm>
#include <cmath>

namespace holoseries {

double ipow(double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

cplx ipow(cplx base, int exp) {
    cplx r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

PolyInX PolyInX::constant(int dim, cplx value) {
    PolyInX p(dim);
    if (value != 0.0) p.terms_.emplace(MultiIndex::zero(dim), value);
    return p;
}

int PolyInX::degree() const {
    int d = 0;
    for (const auto& [gamma, c] : terms_) d = std::max(d, gamma.order());
    return d;
}

cplx PolyInX::coeff(const MultiIndex& gamma) const {
    auto it = terms_.find(gamma);
    return it == terms_.end() ? cplx(0.0) : it->second;
}

void PolyInX::add(const MultiIndex& gamma, cplx value) {
    if (gamma.dim() != dim_) throw ConfigError("PolyInX: index dimension mismatch");
    auto [it, inserted] = terms_.emplace(gamma, value);
    if (!inserted) it->second += value;
}

void PolyInX::set(const MultiIndex& gamma, cplx value) {
    if (gamma.dim() != dim_) throw ConfigError("PolyInX: index dimension mismatch");
    if (value == 0.0) {
        terms_.erase(gamma);
    } else {
        terms_[gamma] = value;
    }
}

PolyInX& PolyInX::operator+=(const PolyInX& o) {
    for (const auto& [gamma, c] : o.terms_) add(gamma, c);
    return *this;
}

PolyInX& PolyInX::operator*=(cplx scale) {
    for (auto& [gamma, c] : terms_) c *= scale;
    return *this;
}

PolyInX PolyInX::times(const PolyInX& o) const {
    PolyInX out(dim_);
    for (const auto& [ga, ca] : terms_) {
        for (const auto& [gb, cb] : o.terms_) {
            out.add(ga.plus(gb), ca * cb);
        }
    }
    return out;
}

PolyInX PolyInX::times_affine(double c, std::span<const double> d) const {
    PolyInX out(dim_);
    for (const auto& [gamma, v] : terms_) {
        if (c != 0.0) out.add(gamma, c * v);
        for (int j = 0; j < dim_; ++j) {
            if (d[static_cast<std::size_t>(j)] != 0.0) {
                out.add(gamma.plus(MultiIndex::unit(dim_, j)), d[static_cast<std::size_t>(j)] * v);
            }
        }
    }
    return out;
}

PolyInX PolyInX::derivative(const MultiIndex& beta) const {
    PolyInX out(dim_);
    for (const auto& [gamma, c] : terms_) {
        if (!beta.leq(gamma)) continue;
        // gamma!/(gamma-beta)! falling factorial per component
        double f = 1.0;
        for (int i = 0; i < dim_; ++i) {
            for (int v = gamma[i]; v > gamma[i] - beta[i]; --v) f *= static_cast<double>(v);
        }
        out.add(gamma.minus(beta), f * c);
    }
    return out;
}

cplx PolyInX::eval(std::span<const double> x) const {
    cplx acc = 0.0;
    for (const auto& [gamma, c] : terms_) {
        double mono = 1.0;
        for (int i = 0; i < dim_; ++i) mono *= ipow(x[static_cast<std::size_t>(i)], gamma[i]);
        acc += c * mono;
    }
    return acc;
}

double PolyInX::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [gamma, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

void PolyInX::prune(double threshold) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second) <= threshold) {
            it = terms_.erase(it);
        } else {
            ++it;
        }
    }
}

} // namespace holoseries
