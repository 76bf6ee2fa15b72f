#pragma once

#include "holoseries/series.hpp"

#include <span>
#include <vector>

namespace holoseries {

/// Coefficients of the logarithm of the substituted series, split into their
/// affine parts: log p_hat = sum_k (rho0[k] + x.rho1[k]) w^k. For an affine
/// generator every rho_k is affine in x up to roundoff; the residual list
/// records the relative magnitude of whatever |gamma| >= 2 content appeared.
struct RhoSeries {
    double eta = 0.0;
    std::vector<double> u;
    std::vector<cplx> rho0;
    std::vector<std::vector<cplx>> rho1;
    std::vector<double> affinity_residuals;
};

/// Log-expansion of an h-sequence via the power-series logarithm recursion
///   rho_k = h_k - (1/k) sum_{j=1}^{k-1} j rho_j h_{k-j},
/// computed on whole polynomials so affinity is read off the coefficients.
/// Throws NumericError when a residual exceeds affine_tol relative to the
/// coefficient scale of that order.
RhoSeries rho_sequence(const SeriesExpansion& h_seq, int k_max, double affine_tol = 1e-8);

/// Exponent of the log-affine ansatz at one time point.
struct LogAffineExponent {
    cplx C{0.0, 0.0};
    std::vector<cplx> D;
    double s = 0.0;
    std::vector<double> u;
    int branch_windings = 0;
};

/// C and D recovered from the h-coefficients:
///   C = log sum_r h_{r,0} w^r (continuous branch followed from s = 0),
///   D_j = i u_j + (sum_{r>=1} h_{r,e_j} w^r) / (sum_r h_{r,0} w^r).
/// Throws NumericError when the denominator series passes within tol of zero.
LogAffineExponent cd_from_h(const SeriesExpansion& h_seq, double s, const EvalOptions& opts = {});

/// exp( sum_k (rho0[k] + x.rho1[k]) w^k ), with the q-series stopping rules.
EvalResult log_affine_eval(const RhoSeries& rho, std::span<const double> x, double s,
                           const EvalOptions& opts = {});

} // namespace holoseries
