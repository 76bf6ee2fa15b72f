#pragma once

#include "holoseries/multiindex.hpp"

#include <complex>
#include <map>
#include <span>

namespace holoseries {

using cplx = std::complex<double>;

/// x^n with integer n >= 0 by repeated multiplication.
double ipow(double base, int exp);
cplx ipow(cplx base, int exp);

/// Sparse polynomial in x with complex coefficients, indexed by multi-index.
/// This is the shape of every series coefficient: degree grows with the
/// expansion order, terms stay sparse.
class PolyInX {
public:
    explicit PolyInX(int dim) : dim_(dim) {}
    static PolyInX constant(int dim, cplx value);

    int dim() const { return dim_; }
    /// Largest |gamma| carried (0 for the zero polynomial).
    int degree() const;
    bool empty() const { return terms_.empty(); }

    cplx coeff(const MultiIndex& gamma) const;
    void add(const MultiIndex& gamma, cplx value);
    void set(const MultiIndex& gamma, cplx value);

    PolyInX& operator+=(const PolyInX& o);
    PolyInX& operator*=(cplx scale);
    PolyInX times(const PolyInX& o) const;
    /// Multiply by the affine function c + d.x.
    PolyInX times_affine(double c, std::span<const double> d) const;
    /// Partial derivative d^beta.
    PolyInX derivative(const MultiIndex& beta) const;

    cplx eval(std::span<const double> x) const;
    double max_abs_coeff() const;
    /// Drop entries with |coeff| <= threshold.
    void prune(double threshold);

    const std::map<MultiIndex, cplx, GradedLexLess>& terms() const { return terms_; }

private:
    int dim_ = 0;
    std::map<MultiIndex, cplx, GradedLexLess> terms_;
};

} // namespace holoseries
