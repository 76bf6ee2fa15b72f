#include "holoseries/series.hpp"

#include "holoseries/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace holoseries {

namespace {

// stop the recursion before coefficient magnitudes can leave double range
constexpr double kLogOverflowGuard = 650.0;

double log_growth_bound(const GrowthProfile& profile, int n, double box_sup, double u_norm, int r) {
    const double th = profile.theta(u_norm);
    if (th == 0.0) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(r) + 2.0) +
           r * (n * std::log(2.0) + std::log1p(box_sup) + std::log(th));
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct RecursionContext {
    const GeneratorSpec& gen;
    SymbolCoefficients sym;
    std::vector<MultiIndex> gammas;  // all |gamma| <= r_max, graded order
    GrowthProfile profile;
    double box_sup;
    double u_norm;

    RecursionContext(const GeneratorSpec& g, std::span<const double> u, int r_max)
        : gen(g),
          sym(symbol_coefficients(g, u)),
          gammas(enumerate_multiindices(g.dim(), std::max(r_max, 0))),
          profile(growth_profile(g)),
          box_sup(g.domain().sup_norm()),
          u_norm(max_abs(u)) {}
};

/// One step of the coefficient recursion shared by the g- and h-routes:
///   out_gamma = sum_{|beta| <= r - |gamma|} binom(gamma+beta, beta) prev_{gamma+beta} b0_beta
///             + sum_{kappa <= gamma} sum_{|beta| <= r+1-|gamma|}
///                   binom(gamma-kappa+beta, beta) prev_{gamma-kappa+beta} b1_{beta,kappa}
PolyInX recursion_step(const RecursionContext& ctx, const PolyInX& prev, int r) {
    const int n = ctx.gen.dim();
    PolyInX out(n);
    for (const MultiIndex& gamma : ctx.gammas) {
        const int go = gamma.order();
        if (go > r + 1) break;  // graded order: all later gammas are larger
        cplx acc = 0.0;
        for (const auto& [beta, b0v] : ctx.sym.b0) {
            if (beta.order() > r - go) continue;
            const cplx prev_c = prev.coeff(gamma.plus(beta));
            if (prev_c != 0.0) acc += multi_binomial(gamma.plus(beta), beta) * prev_c * b0v;
        }
        for (const auto& [beta, b1v] : ctx.sym.b1) {
            if (beta.order() > r + 1 - go) continue;
            for (int j = 0; j < n; ++j) {
                if (gamma[j] < 1 || b1v[static_cast<std::size_t>(j)] == 0.0) continue;
                const MultiIndex idx = gamma.minus(MultiIndex::unit(n, j)).plus(beta);
                const cplx prev_c = prev.coeff(idx);
                if (prev_c != 0.0) {
                    acc += multi_binomial(idx, beta) * prev_c * b1v[static_cast<std::size_t>(j)];
                }
            }
        }
        if (acc != 0.0) out.set(gamma, acc);
    }
    return out;
}

} // namespace

SeriesExpansion g_sequence(const GeneratorSpec& gen, std::span<const double> u, int r_max) {
    if (r_max < 0) throw ConfigError("g_sequence: r_max must be >= 0");
    RecursionContext ctx(gen, u, r_max + 1);
    SeriesExpansion out;
    out.kind = SeriesKind::taylor_g;
    out.u.assign(u.begin(), u.end());
    out.coeffs.push_back(PolyInX::constant(gen.dim(), 1.0));
    for (int r = 0; r < r_max; ++r) {
        if (log_growth_bound(ctx.profile, gen.dim(), ctx.box_sup, ctx.u_norm, r + 1) >
            kLogOverflowGuard) {
            out.truncated = true;
            break;
        }
        out.coeffs.push_back(recursion_step(ctx, out.coeffs.back(), r));
    }
    return out;
}

SeriesExpansion h_sequence(const GeneratorSpec& gen, std::span<const double> u, double eta,
                           int r_max) {
    if (r_max < 0) throw ConfigError("h_sequence: r_max must be >= 0");
    if (!(eta > 0.0)) throw ConfigError("h_sequence: eta must be > 0");
    RecursionContext ctx(gen, u, r_max + 1);
    const double log_eta_penalty = std::max(0.0, -std::log(eta));
    SeriesExpansion out;
    out.kind = SeriesKind::q_series;
    out.eta = eta;
    out.u.assign(u.begin(), u.end());
    out.coeffs.push_back(PolyInX::constant(gen.dim(), 1.0));
    for (int r = 0; r < r_max; ++r) {
        if (log_growth_bound(ctx.profile, gen.dim(), ctx.box_sup, ctx.u_norm, r + 1) +
                (r + 1) * log_eta_penalty >
            kLogOverflowGuard) {
            out.truncated = true;
            break;
        }
        PolyInX next = recursion_step(ctx, out.coeffs.back(), r);
        next *= 1.0 / eta;
        PolyInX prev_scaled = out.coeffs.back();
        prev_scaled *= static_cast<double>(r);
        next += prev_scaled;
        next *= 1.0 / static_cast<double>(r + 1);
        next.prune(0.0);
        out.coeffs.push_back(std::move(next));
    }
    return out;
}

PolyInX apply_generator(const GeneratorSpec& gen, std::span<const double> u, const PolyInX& p) {
    const int n = gen.dim();
    PolyInX out(n);
    std::vector<int> beta(static_cast<std::size_t>(n), 0);
    for (const auto& [alpha, pair] : gen.coeffs()) {
        auto visit = [&](auto&& self, int pos) -> void {
            if (pos == n) {
                MultiIndex b(beta);
                PolyInX dp = p.derivative(b);
                if (dp.empty()) return;
                cplx mono = 1.0;
                const MultiIndex rest = alpha.minus(b);
                for (int i = 0; i < n; ++i) {
                    mono *= ipow(cplx(0.0, u[static_cast<std::size_t>(i)]), rest[i]);
                }
                dp *= multi_binomial(alpha, b) * mono;
                out += dp.times_affine(pair.c, pair.d);
                return;
            }
            for (int v = 0; v <= alpha[pos]; ++v) {
                beta[static_cast<std::size_t>(pos)] = v;
                self(self, pos + 1);
            }
            beta[static_cast<std::size_t>(pos)] = 0;
        };
        visit(visit, 0);
    }
    out.prune(0.0);
    return out;
}

SeriesExpansion h_sequence_by_rec(const GeneratorSpec& gen, std::span<const double> u, double eta,
                                  int r_max) {
    if (r_max < 0) throw ConfigError("h_sequence_by_rec: r_max must be >= 0");
    if (!(eta > 0.0)) throw ConfigError("h_sequence_by_rec: eta must be > 0");
    SeriesExpansion out;
    out.kind = SeriesKind::q_series;
    out.eta = eta;
    out.u.assign(u.begin(), u.end());
    out.coeffs.push_back(PolyInX::constant(gen.dim(), 1.0));
    for (int k = 0; k < r_max; ++k) {
        PolyInX next = apply_generator(gen, u, out.coeffs.back());
        next *= 1.0 / eta;
        PolyInX prev_scaled = out.coeffs.back();
        prev_scaled *= static_cast<double>(k);
        next += prev_scaled;
        next *= 1.0 / static_cast<double>(k + 1);
        next.prune(0.0);
        out.coeffs.push_back(std::move(next));
    }
    return out;
}

PolyInX q_from_stirling(const SeriesExpansion& g_seq, const StirlingTable& stirling, double eta,
                        int k, SumMode mode) {
    if (g_seq.kind != SeriesKind::taylor_g) {
        throw ConfigError("q_from_stirling: expected a taylor-g sequence");
    }
    if (k < 0 || k >= static_cast<int>(g_seq.coeffs.size()) || k > stirling.k_max()) {
        throw ConfigError("q_from_stirling: k out of range of the available tables");
    }
    const int n = g_seq.coeffs.front().dim();
    double k_fact = 1.0;
    for (int i = 2; i <= k; ++i) k_fact *= static_cast<double>(i);

    // weights c[k][r] eta^{-r} / k!
    std::vector<double> w(static_cast<std::size_t>(k) + 1, 0.0);
    double eta_pow = 1.0;
    for (int r = 0; r <= k; ++r) {
        w[static_cast<std::size_t>(r)] = stirling.entry_double(k, r) / k_fact * eta_pow;
        eta_pow /= eta;
    }

    PolyInX out(n);
    // gather the union of index sets, then combine per index
    std::map<MultiIndex, KahanSum<cplx>, GradedLexLess> acc;
    for (int r = 0; r <= k; ++r) {
        if (w[static_cast<std::size_t>(r)] == 0.0) continue;
        for (const auto& [gamma, c] : g_seq.coeffs[static_cast<std::size_t>(r)].terms()) {
            if (mode == SumMode::compensated) {
                acc[gamma].add(w[static_cast<std::size_t>(r)] * c);
            } else {
                acc[gamma].sum += w[static_cast<std::size_t>(r)] * c;
            }
        }
    }
    for (const auto& [gamma, sum] : acc) {
        if (sum.get() != 0.0) out.set(gamma, sum.get());
    }
    return out;
}

double verify_qsys(const SeriesExpansion& h_seq, const SeriesExpansion& g_seq,
                   const GeneratorSpec& gen, int k_max,
                   std::span<const std::vector<double>> probe_points) {
    if (static_cast<int>(h_seq.coeffs.size()) < k_max + 1 ||
        static_cast<int>(g_seq.coeffs.size()) < k_max + 1) {
        throw ConfigError("verify_qsys: sequences shorter than k_max + 1");
    }
    const double eta = h_seq.eta;
    const GrowthProfile profile = growth_profile(gen);

    // exact integer system matrix M[k][l]
    std::vector<std::vector<double>> M(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) {
        auto& row = M[static_cast<std::size_t>(k)];
        row.resize(static_cast<std::size_t>(k_max) + 1, 0.0);
        for (int l = 0; l <= k_max; ++l) {
            BigInt m = 0;
            for (int j = 0; j <= l; ++j) {
                BigInt t = 1;
                for (int i = 1; i <= j; ++i) { t *= l - j + i; t /= i; }  // binom(l, j)
                BigInt p = 1;
                for (int i = 0; i < k; ++i) p *= -j;  // (-j)^k, 0^0 = 1
                t *= p;
                if (j % 2 == 1) t = -t;
                m += t;
            }
            row[static_cast<std::size_t>(l)] = m.convert_to<double>();
        }
    }

    double worst = 0.0;
    for (const auto& x : probe_points) {
        std::vector<cplx> h_vals(static_cast<std::size_t>(k_max) + 1);
        std::vector<cplx> g_vals(static_cast<std::size_t>(k_max) + 1);
        for (int l = 0; l <= k_max; ++l) {
            h_vals[static_cast<std::size_t>(l)] = h_seq.coeffs[static_cast<std::size_t>(l)].eval(x);
            g_vals[static_cast<std::size_t>(l)] = g_seq.coeffs[static_cast<std::size_t>(l)].eval(x);
        }
        for (int k = 0; k <= k_max; ++k) {
            KahanSum<cplx> lhs;
            for (int l = 0; l <= k; ++l) {
                lhs.add(h_vals[static_cast<std::size_t>(l)] * M[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]);
            }
            const double eta_pow = ipow(1.0 / eta, k);
            const cplx rhs = eta_pow * g_vals[static_cast<std::size_t>(k)];
            const double denom =
                std::max(eta_pow * coefficient_bound(profile, gen.dim(), x, h_seq.u, k), 1e-300);
            worst = std::max(worst, std::abs(lhs.get() - rhs) / denom);
        }
    }
    return worst;
}

EtaSelection select_eta(const GeneratorSpec& gen, std::span<const double> u, double d_star,
                        DStarSource source) {
    (void)u;  // the radius bound depends on u only through d_star
    const GrowthProfile profile = growth_profile(gen);
    const double th = profile.theta(d_star);
    if (th == 0.0) {
        throw ConfigError(profile.is_zero()
                              ? "select_eta: zero generator; the series is the single term f_u"
                              : "select_eta: theta(d_star) vanished; check d_star");
    }
    EtaSelection sel;
    sel.d_star = d_star;
    sel.source = source;
    sel.r_u = 1.0 / (ipow(2.0, gen.dim()) * th * (1.0 + gen.domain().sup_norm()));
    sel.eta = std::numbers::pi / sel.r_u;
    return sel;
}

namespace {

cplx phase_factor(std::span<const double> u, std::span<const double> x) {
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * x[i];
    return std::polar(1.0, dot);
}

} // namespace

EvalResult taylor_eval(const SeriesExpansion& g_seq, const GeneratorSpec& gen,
                       std::span<const double> x, cplx s, const EvalOptions& opts) {
    if (g_seq.kind != SeriesKind::taylor_g) throw ConfigError("taylor_eval: expected taylor-g coefficients");
    EvalResult res;
    const GrowthProfile profile = growth_profile(gen);
    const double th = profile.theta(max_abs(g_seq.u));
    double radius = std::numeric_limits<double>::infinity();
    if (th > 0.0) {
        double xn = max_abs(x);
        radius = 1.0 / (ipow(2.0, gen.dim()) * (1.0 + xn) * th);
    }
    res.radius_warning = std::abs(s) >= radius;

    KahanSum<cplx> partial;
    cplx s_pow = 1.0;  // s^k / k!
    int small_streak = 0;
    int k = 0;
    double last_term = 0.0;
    for (; k < static_cast<int>(g_seq.coeffs.size()) && k <= opts.max_terms; ++k) {
        if (k > 0) s_pow *= s / static_cast<double>(k);
        const cplx term = s_pow * g_seq.coeffs[static_cast<std::size_t>(k)].eval(x);
        if (opts.sum == SumMode::compensated) partial.add(term);
        else partial.sum += term;
        last_term = std::abs(term);
        if (last_term < opts.tol * (1.0 + std::abs(partial.get()))) {
            if (++small_streak >= 3) { ++k; res.converged = true; break; }
        } else {
            small_streak = 0;
        }
    }
    res.n_terms = k;
    // geometric tail majorant (k+1) rho^k inside the radius estimate
    const double rho = std::abs(s) / radius;
    if (rho < 1.0) {
        const double m = static_cast<double>(k);
        res.tail_estimate = ipow(rho, k) * ((m + 1.0) - m * rho) / ((1.0 - rho) * (1.0 - rho));
    } else {
        res.tail_estimate = last_term;
    }
    res.value = partial.get() * phase_factor(g_seq.u, x);
    return res;
}

EvalResult q_series_eval(const SeriesExpansion& h_seq, std::span<const double> x, double s,
                         const EvalOptions& opts) {
    if (h_seq.kind != SeriesKind::q_series) throw ConfigError("q_series_eval: expected q-series coefficients");
    if (s < 0.0) throw ConfigError("q_series_eval: s must be >= 0");
    const double w = -std::expm1(-h_seq.eta * s);

    EvalResult res;
    KahanSum<cplx> partial;
    double w_pow = 1.0;
    int small_streak = 0, grow_streak = 0;
    double prev_mag = std::numeric_limits<double>::infinity();
    double last_term = 0.0;
    int k = 0;
    for (; k < static_cast<int>(h_seq.coeffs.size()) && k <= opts.max_terms; ++k) {
        if (k > 0) w_pow *= w;
        const cplx term = w_pow * h_seq.coeffs[static_cast<std::size_t>(k)].eval(x);
        if (opts.sum == SumMode::compensated) partial.add(term);
        else partial.sum += term;
        last_term = std::abs(term);
        if (last_term < opts.tol * (1.0 + std::abs(partial.get()))) {
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
    res.value = partial.get() * phase_factor(h_seq.u, x);
    return res;
}

} // namespace holoseries
