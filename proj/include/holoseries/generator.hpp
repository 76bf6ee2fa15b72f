#pragma once

#include "holoseries/multiindex.hpp"
#include "holoseries/polynomial.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace holoseries {

/// Axis-aligned state-space box containing the origin.
struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    /// sup over the box of the max-norm.
    double sup_norm() const;
    void validate(int n) const;
};

/// Value c + d.x of an affine coefficient.
struct AffinePair {
    double c = 0.0;
    std::vector<double> d;

    bool is_zero() const;
    double eval(std::span<const double> x) const;
};

/// Affine jump data: intensity lambda0 + lambda1.x and raw moments
/// of the normalized jump measure, integral z^alpha mu(dz), |alpha| >= 2.
struct JumpSpec {
    double lambda0 = 0.0;
    std::vector<double> lambda1;
    std::map<MultiIndex, double, GradedLexLess> moments;
};

/// Structured model input: affine drift b(x) = b0 + B x, affine squared
/// diffusion a(x) = a0 + sum_i x_i a_i (each matrix symmetric, PSD on the
/// box), optional jumps.
struct ModelParts {
    int n = 1;
    std::vector<double> drift_const;                           // b0
    std::vector<std::vector<double>> drift_linear;             // B, row i = gradient of b_i
    std::vector<std::vector<double>> diff_const;               // a0
    std::vector<std::vector<std::vector<double>>> diff_linear; // a_i per state axis
    std::optional<JumpSpec> jumps;
    Box domain;
    int k_max = 20;
};

/// The generator written as an infinite-order differential operator with
/// affine coefficients a_alpha(x) = c_alpha + x.d_alpha, truncated at k_max.
/// Order-0 is always absent and order-1 carries no jump contribution (the
/// compensator removes it).
class GeneratorSpec {
public:
    GeneratorSpec(int n, int k_max, Box domain,
                  std::map<MultiIndex, AffinePair, GradedLexLess> coeffs);

    int dim() const { return n_; }
    int k_max() const { return k_max_; }
    const Box& domain() const { return domain_; }
    const std::map<MultiIndex, AffinePair, GradedLexLess>& coeffs() const { return coeffs_; }

    /// Zero pair if alpha is not stored.
    AffinePair at(const MultiIndex& alpha) const;

private:
    int n_;
    int k_max_;
    Box domain_;
    std::map<MultiIndex, AffinePair, GradedLexLess> coeffs_;
};

/// Assemble and validate a GeneratorSpec from structured model data.
/// Throws ConfigError on asymmetric diffusion, diffusion not PSD on the box,
/// intensity negative on the box, or an incomplete jump moment table.
GeneratorSpec build_generator(const ModelParts& model);

/// The affine split of the moment symbols: for every beta,
///   b_beta(x, u) = b0(beta) + sum_kappa b1(beta)[kappa] x^kappa,
/// where b0(beta) = sum_alpha c_{alpha+beta} ((alpha+beta)!/alpha!) (iu)^alpha
/// and b1 likewise from the d-parts. These drive the coefficient recursions.
struct SymbolCoefficients {
    std::vector<double> u;
    std::map<MultiIndex, cplx, GradedLexLess> b0;
    std::map<MultiIndex, std::vector<cplx>, GradedLexLess> b1;  // value per unit axis

    cplx b0_at(const MultiIndex& beta) const;
    cplx b1_at(const MultiIndex& beta, int axis) const;
};

SymbolCoefficients symbol_coefficients(const GeneratorSpec& gen, std::span<const double> u);

/// Growth profile of the coefficient family: D_k = sup over the box of
/// |d^beta a_alpha(x)| / (1 + ||x||), |alpha| = k, |beta| <= 1, and
/// theta(v) = sum_k 2^k (1+v)^k D_k. Everything is closed-form because the
/// coefficients are affine; the sup candidates are the breakpoint radii of
/// the box plus the origin.
class GrowthProfile {
public:
    explicit GrowthProfile(std::vector<double> d_k);

    int k_max() const { return static_cast<int>(d_k_.size()) - 1; }
    double dk(int k) const;
    double theta(double v) const;
    bool is_zero() const;

private:
    std::vector<double> d_k_;  // index 0 unused
};

GrowthProfile growth_profile(const GeneratorSpec& gen);

/// Upper bound (r+1)! 2^{nr} (1+||x||)^r theta(||u||)^r on |A^r f_u(x)|,
/// max-norms throughout. Computed in log space; may return +inf.
double coefficient_bound(const GeneratorSpec& gen, std::span<const double> x,
                         std::span<const double> u, int r);
double coefficient_bound(const GrowthProfile& profile, int n, std::span<const double> x,
                         std::span<const double> u, int r);

/// Truncation-tail proxy for the moment series: sum over |alpha| = k_max of
/// sup_box |a_alpha| times (1+||u||)^k_max. Large values mean the k_max
/// truncation is not trustworthy at this u.
double moment_tail_proxy(const GeneratorSpec& gen, double u_norm);

} // namespace holoseries
