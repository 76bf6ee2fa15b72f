#include "holoseries/log_affine.hpp"

#include "holoseries/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace holoseries {

namespace {

bool is_one(const PolyInX& p) {
    return p.terms().size() == 1 && p.terms().begin()->first.order() == 0 &&
           p.terms().begin()->second == cplx(1.0);
}

} // namespace

RhoSeries rho_sequence(const SeriesExpansion& h_seq, int k_max, double affine_tol) {
    if (h_seq.kind != SeriesKind::q_series) throw ConfigError("rho_sequence: expected an h-sequence");
    if (h_seq.coeffs.empty() || !is_one(h_seq.coeffs.front())) {
        throw ConfigError("rho_sequence: h_0 must be the constant 1");
    }
    if (k_max >= static_cast<int>(h_seq.coeffs.size())) {
        throw ConfigError("rho_sequence: k_max exceeds the available h-coefficients");
    }
    const int n = h_seq.coeffs.front().dim();

    RhoSeries out;
    out.eta = h_seq.eta;
    out.u = h_seq.u;
    out.rho0.assign(static_cast<std::size_t>(k_max) + 1, cplx(0.0));
    out.rho1.assign(static_cast<std::size_t>(k_max) + 1,
                    std::vector<cplx>(static_cast<std::size_t>(n), cplx(0.0)));
    out.affinity_residuals.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (int j = 0; j < n; ++j) {
        out.rho1[0][static_cast<std::size_t>(j)] = cplx(0.0, h_seq.u[static_cast<std::size_t>(j)]);
    }

    std::vector<PolyInX> rho;  // full polynomials, affinity measured on coefficients
    rho.push_back(PolyInX(n)); // rho_0 enters no product below; its value is iu.x
    // Residuals are judged against the running coefficient scale of the
    // log-series (the series is h_0-normalized, so the scale starts at 1).
    // The order's own scale can vanish identically -- for an OU-type model
    // every rho_k beyond the quadratic is exactly zero and the computed
    // polynomial is pure roundoff -- and noise measured against noise would
    // flag a false violation.
    double running_scale = 1.0;
    for (int k = 1; k <= k_max; ++k) {
        PolyInX r = h_seq.coeffs[static_cast<std::size_t>(k)];
        for (int j = 1; j <= k - 1; ++j) {
            PolyInX prod = rho[static_cast<std::size_t>(j)].times(
                h_seq.coeffs[static_cast<std::size_t>(k - j)]);
            prod *= -static_cast<double>(j) / static_cast<double>(k);
            r += prod;
        }
        r.prune(0.0);

        running_scale = std::max(running_scale, r.max_abs_coeff());
        double worst = 0.0;
        for (const auto& [gamma, c] : r.terms()) {
            const int o = gamma.order();
            if (o == 0) {
                out.rho0[static_cast<std::size_t>(k)] = c;
            } else if (o == 1) {
                for (int j = 0; j < n; ++j) {
                    if (gamma[j] == 1) out.rho1[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = c;
                }
            } else {
                worst = std::max(worst, std::abs(c));
            }
        }
        const double rel = worst / running_scale;
        out.affinity_residuals[static_cast<std::size_t>(k)] = rel;
        if (rel > affine_tol) {
            throw NumericError("rho_sequence: order " + std::to_string(k) +
                               " is not affine in x (relative residual " + std::to_string(rel) +
                               "); non-affine generator or accumulated roundoff");
        }
        rho.push_back(std::move(r));
    }
    return out;
}

namespace {

struct ScalarSeries {
    std::vector<cplx> a;

    /// Evaluate sum a_r w^r with the stopping rule; returns value and whether
    /// the stop rule fired before coefficients ran out.
    std::pair<cplx, bool> eval(double w, const EvalOptions& opts) const {
        KahanSum<cplx> acc;
        double w_pow = 1.0;
        int streak = 0;
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (r > 0) w_pow *= w;
            const cplx term = a[r] * w_pow;
            if (opts.sum == SumMode::compensated) acc.add(term);
            else acc.sum += term;
            if (std::abs(term) < opts.tol * (1.0 + std::abs(acc.get()))) {
                if (++streak >= 3) return {acc.get(), true};
            } else {
                streak = 0;
            }
        }
        return {acc.get(), false};
    }
};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

} // namespace

LogAffineExponent cd_from_h(const SeriesExpansion& h_seq, double s, const EvalOptions& opts) {
    if (h_seq.kind != SeriesKind::q_series) throw ConfigError("cd_from_h: expected an h-sequence");
    if (s < 0.0) throw ConfigError("cd_from_h: s must be >= 0");
    const int n = h_seq.coeffs.front().dim();

    ScalarSeries s0;
    std::vector<ScalarSeries> s1(static_cast<std::size_t>(n));
    s0.a.reserve(h_seq.coeffs.size());
    for (const auto& poly : h_seq.coeffs) {
        s0.a.push_back(poly.coeff(MultiIndex::zero(n)));
        for (int j = 0; j < n; ++j) {
            s1[static_cast<std::size_t>(j)].a.push_back(poly.coeff(MultiIndex::unit(n, j)));
        }
    }
    for (int j = 0; j < n; ++j) s1[static_cast<std::size_t>(j)].a[0] = 0.0;  // sums start at r = 1

    auto denom_at = [&](double sv) {
        const double w = -std::expm1(-h_seq.eta * sv);
        const cplx d = s0.eval(w, opts).first;
        if (std::abs(d) < opts.tol) {
            throw NumericError("cd_from_h: constant-coefficient series vanished near s = " +
                               std::to_string(sv) + "; log-affine branch undefined there");
        }
        return d;
    };

    // follow the continuous branch of log from s = 0, bisecting until each
    // step moves C by less than pi/2
    cplx c_prev = 0.0;  // C(0) = 0
    double s_prev = 0.0;
    auto advance = [&](auto&& self, double s_next, int depth) -> void {
        const cplx raw = std::log(denom_at(s_next));
        const double shift = std::round((c_prev.imag() - raw.imag()) / kTwoPi);
        const cplx cand = raw + cplx(0.0, kTwoPi * shift);
        if (std::abs(cand - c_prev) > std::numbers::pi / 2.0 && depth < 48 &&
            s_next - s_prev > 1e-13 * std::max(1.0, s)) {
            const double mid = 0.5 * (s_prev + s_next);
            self(self, mid, depth + 1);
            self(self, s_next, depth + 1);
            return;
        }
        c_prev = cand;
        s_prev = s_next;
    };
    if (s > 0.0) advance(advance, s, 0);

    LogAffineExponent out;
    out.s = s;
    out.u = h_seq.u;
    out.C = c_prev;
    out.branch_windings = static_cast<int>(std::lround((c_prev.imag() - std::log(denom_at(s)).imag()) / kTwoPi));
    out.D.assign(static_cast<std::size_t>(n), cplx(0.0));
    const double w = -std::expm1(-h_seq.eta * s);
    const cplx den = denom_at(s);
    for (int j = 0; j < n; ++j) {
        const cplx num = s1[static_cast<std::size_t>(j)].eval(w, opts).first;
        out.D[static_cast<std::size_t>(j)] = cplx(0.0, h_seq.u[static_cast<std::size_t>(j)]) + num / den;
    }
    return out;
}

EvalResult log_affine_eval(const RhoSeries& rho, std::span<const double> x, double s,
                           const EvalOptions& opts) {
    if (s < 0.0) throw ConfigError("log_affine_eval: s must be >= 0");
    const double w = -std::expm1(-rho.eta * s);
    EvalResult res;
    KahanSum<cplx> exponent;
    double w_pow = 1.0;
    int small_streak = 0, grow_streak = 0;
    double prev_mag = std::numeric_limits<double>::infinity();
    double last_term = 0.0;
    int k = 0;
    for (; k < static_cast<int>(rho.rho0.size()) && k <= opts.max_terms; ++k) {
        if (k > 0) w_pow *= w;
        cplx coeff = rho.rho0[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < x.size(); ++j) coeff += x[j] * rho.rho1[static_cast<std::size_t>(k)][j];
        const cplx term = coeff * w_pow;
        if (opts.sum == SumMode::compensated) exponent.add(term);
        else exponent.sum += term;
        last_term = std::abs(term);
        if (last_term < opts.tol * (1.0 + std::abs(exponent.get()))) {
            if (++small_streak >= 3) { ++k; res.converged = true; break; }
        } else {
            small_streak = 0;
        }
        if (k > 0 && last_term > prev_mag) {
            if (++grow_streak >= 5) res.diverging = true;
        } else {
            grow_streak = 0;
        }
        prev_mag = last_term;
    }
    res.n_terms = k;
    res.tail_estimate = last_term;
    res.value = std::exp(exponent.get());
    return res;
}

} // namespace holoseries
