#pragma once

#include "holoseries/compensated.hpp"
#include "holoseries/generator.hpp"
#include "holoseries/multiindex.hpp"
#include "holoseries/polynomial.hpp"

#include <complex>
#include <span>
#include <vector>

namespace holoseries {

enum class SeriesKind { taylor_g, q_series };

/// An evaluable coefficient sequence at fixed (u, eta): either the Taylor
/// coefficients g_r (A^r f_u = g_r f_u) or the substituted-series
/// coefficients h_r (q_r = h_r f_u, evaluated in w = 1 - e^{-eta s}).
/// Coefficients are built once per (u, eta) and reused for every (s, x);
/// immutable after construction.
struct SeriesExpansion {
    SeriesKind kind = SeriesKind::taylor_g;
    double eta = 0.0;  // unused for taylor_g
    std::vector<double> u;
    std::vector<PolyInX> coeffs;
    /// True when the overflow guard stopped the recursion before r_max.
    bool truncated = false;
};

/// Taylor coefficient polynomials g_0..g_r_max by the affine recursion.
/// g_r has degree <= r. If the growth bound predicts double overflow the
/// sequence is cut short and flagged.
SeriesExpansion g_sequence(const GeneratorSpec& gen, std::span<const double> u, int r_max);

/// Substituted-series coefficients h_0..h_r_max at scale eta > 0.
SeriesExpansion h_sequence(const GeneratorSpec& gen, std::span<const double> u, double eta,
                           int r_max);

/// Apply the generator to p(x) f_u(x) and strip the f_u factor, by the
/// Leibniz expansion over the raw coefficients a_alpha. Independent of the
/// symbol-based recursions; used as the third construction route.
PolyInX apply_generator(const GeneratorSpec& gen, std::span<const double> u, const PolyInX& p);

/// h-sequence rebuilt through the plain operator recursion
/// (k+1) q_{k+1} = eta^{-1} A q_k + k q_k, with A applied via apply_generator.
SeriesExpansion h_sequence_by_rec(const GeneratorSpec& gen, std::span<const double> u, double eta,
                                  int r_max);

/// Stirling-weighted combination (1/k!) sum_r c[k][r] eta^{-r} g_r;
/// equals the h-recursion output at index k.
PolyInX q_from_stirling(const SeriesExpansion& g_seq, const StirlingTable& stirling, double eta,
                        int k, SumMode mode = SumMode::compensated);

/// Residual of the derivative-matching linear system relating h to g:
///   max over k <= k_max, probe x of
///   | sum_l h_l(x) M_{k,l} - eta^{-k} g_k(x) |  /  (eta^{-k} * growth bound),
/// where M_{k,l} = sum_j binom(l,j) (-1)^j (-j)^k (exact integers).
double verify_qsys(const SeriesExpansion& h_seq, const SeriesExpansion& g_seq,
                   const GeneratorSpec& gen, int k_max,
                   std::span<const std::vector<double>> probe_points);

enum class DStarSource { user, oracle };

/// Scale selection for the substituted series. r_u is the guaranteed lower
/// bound on the extension radius given d_star = sup_s ||D(s,u)||, and
/// eta = pi / r_u. Conservative: valid whenever d_star is a true bound, but
/// large eta slows convergence at s beyond r_u; callers may override eta.
struct EtaSelection {
    double r_u = 0.0;
    double eta = 0.0;
    double d_star = 0.0;
    DStarSource source = DStarSource::user;
};

EtaSelection select_eta(const GeneratorSpec& gen, std::span<const double> u, double d_star,
                        DStarSource source);

struct EvalOptions {
    double tol = 1e-10;
    int max_terms = 4000;
    SumMode sum = SumMode::compensated;
};

struct EvalResult {
    cplx value{0.0, 0.0};
    int n_terms = 0;
    double tail_estimate = 0.0;
    bool converged = false;
    /// Term magnitudes grew for 5 consecutive orders (series likely invalid here).
    bool diverging = false;
    /// |s| at or beyond the Taylor radius estimate.
    bool radius_warning = false;
};

/// sum_k (s^k / k!) g_k(x) * e^{iu.x}, stopped after three consecutive terms
/// below tol * (1 + |partial|). The growth profile provides a geometric tail
/// majorant inside the radius estimate.
EvalResult taylor_eval(const SeriesExpansion& g_seq, const GeneratorSpec& gen,
                       std::span<const double> x, cplx s, const EvalOptions& opts = {});

/// sum_k h_k(x) w^k * e^{iu.x} with w = 1 - e^{-eta s}, s >= 0.
EvalResult q_series_eval(const SeriesExpansion& h_seq, std::span<const double> x, double s,
                         const EvalOptions& opts = {});

} // namespace holoseries
