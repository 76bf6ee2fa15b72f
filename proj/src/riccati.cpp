#include "holoseries/riccati.hpp"

#include "holoseries/errors.hpp"

#include <algorithm>
#include <cmath>

namespace holoseries {

std::pair<cplx, std::vector<cplx>> riccati_rhs(const GeneratorSpec& gen, std::span<const cplx> D) {
    const int n = gen.dim();
    if (static_cast<int>(D.size()) != n) throw ConfigError("riccati_rhs: D dimension mismatch");
    cplx dC = 0.0;
    std::vector<cplx> dD(static_cast<std::size_t>(n), cplx(0.0));
    for (const auto& [alpha, pair] : gen.coeffs()) {
        cplx mono = 1.0;
        for (int i = 0; i < n; ++i) mono *= ipow(D[static_cast<std::size_t>(i)], alpha[i]);
        dC += pair.c * mono;
        for (int j = 0; j < n; ++j) dD[static_cast<std::size_t>(j)] += pair.d[static_cast<std::size_t>(j)] * mono;
    }
    return {dC, std::move(dD)};
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

using State = std::vector<cplx>;  // [C, D_1..D_n]

State rhs_state(const GeneratorSpec& gen, const State& y) {
    auto [dC, dD] = riccati_rhs(gen, std::span<const cplx>(y.data() + 1, y.size() - 1));
    State f(y.size());
    f[0] = dC;
    for (std::size_t j = 0; j < dD.size(); ++j) f[j + 1] = dD[j];
    return f;
}

double inf_norm(const State& y) {
    double m = 0.0;
    for (const cplx& v : y) m = std::max(m, std::abs(v));
    return m;
}

bool finite(const State& y) {
    for (const cplx& v : y) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
}

} // namespace

RiccatiSolution solve_riccati(const GeneratorSpec& gen, std::span<const double> u, double s_max,
                              double rtol, double explosion_threshold, double max_step) {
    const int n = gen.dim();
    if (static_cast<int>(u.size()) != n) throw ConfigError("solve_riccati: u dimension mismatch");
    if (!(s_max > 0.0)) throw ConfigError("solve_riccati: s_max must be > 0");
    if (!(rtol > 0.0)) throw ConfigError("solve_riccati: rtol must be > 0");
    const double atol = rtol * 1e-2;

    RiccatiSolution sol;
    sol.u.assign(u.begin(), u.end());

    State y(static_cast<std::size_t>(n) + 1, cplx(0.0));
    for (int j = 0; j < n; ++j) y[static_cast<std::size_t>(j) + 1] = cplx(0.0, u[static_cast<std::size_t>(j)]);
    State f = rhs_state(gen, y);

    auto record = [&](double s, const State& yv, const State& fv) {
        sol.grid.push_back(s);
        sol.C_vals.push_back(yv[0]);
        sol.dC_vals.push_back(fv[0]);
        std::vector<cplx> d(static_cast<std::size_t>(n)), dd(static_cast<std::size_t>(n));
        double dn = 0.0;
        for (int j = 0; j < n; ++j) {
            d[static_cast<std::size_t>(j)] = yv[static_cast<std::size_t>(j) + 1];
            dd[static_cast<std::size_t>(j)] = fv[static_cast<std::size_t>(j) + 1];
            dn = std::max(dn, std::abs(d[static_cast<std::size_t>(j)]));
        }
        sol.D_vals.push_back(std::move(d));
        sol.dD_vals.push_back(std::move(dd));
        sol.d_star = std::max(sol.d_star, dn);
    };

    if (!(max_step > 0.0)) throw ConfigError("solve_riccati: max_step must be > 0");
    double s = 0.0;
    record(s, y, f);
    double h = std::min(1e-3 * s_max, max_step);
    const double h_min = 1e-14 * std::max(1.0, s_max);
    const std::size_t dim = y.size();
    State k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim), ynext(dim);

    long step_count = 0;
    while (s < s_max) {
        if (++step_count > 2000000) throw NumericError("solve_riccati: step limit exceeded");
        h = std::min({h, max_step, s_max - s});

        for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * a21 * f[i];
        k2 = rhs_state(gen, ytmp);
        for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * (a31 * f[i] + a32 * k2[i]);
        k3 = rhs_state(gen, ytmp);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs_state(gen, ytmp);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs_state(gen, ytmp);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = rhs_state(gen, ytmp);
        for (std::size_t i = 0; i < dim; ++i)
            ynext[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = rhs_state(gen, ynext);  // FSAL

        double err = 0.0;
        bool ok = finite(ynext) && finite(k7);
        if (ok) {
            for (std::size_t i = 0; i < dim; ++i) {
                const cplx ec = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                     e6 * k6[i] + e7 * k7[i]);
                const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(ynext[i]));
                err = std::max(err, std::abs(ec) / scale);
            }
        }

        if (ok && err <= 1.0) {
            s += h;
            y = ynext;
            f = k7;
            record(s, y, f);
            if (inf_norm(y) > explosion_threshold) {
                sol.blow_up_time = s;
                break;
            }
            const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
        } else {
            const double factor = ok ? std::max(0.9 * std::pow(err, -0.2), 0.1) : 0.1;
            h *= factor;
            if (h < h_min) {
                // cannot resolve the trajectory further: treat as blow-up here
                sol.blow_up_time = s;
                break;
            }
        }
    }
    return sol;
}

std::pair<cplx, std::vector<cplx>> interpolate_cd(const RiccatiSolution& sol, double s) {
    if (sol.grid.empty()) throw ConfigError("interpolate_cd: empty solution");
    if (s < 0.0 || s > sol.grid.back() + 1e-12) {
        throw NumericError("interpolate_cd: s = " + std::to_string(s) +
                           " outside the integrated range [0, " + std::to_string(sol.grid.back()) + "]");
    }
    if (sol.blow_up_time && s >= *sol.blow_up_time) {
        throw NumericError("interpolate_cd: s = " + std::to_string(s) +
                           " at or beyond the blow-up estimate " + std::to_string(*sol.blow_up_time));
    }
    s = std::min(s, sol.grid.back());
    auto it = std::upper_bound(sol.grid.begin(), sol.grid.end(), s);
    std::size_t i1 = std::min(static_cast<std::size_t>(it - sol.grid.begin()), sol.grid.size() - 1);
    std::size_t i0 = i1 - (i1 > 0 ? 1 : 0);
    if (i0 == i1) return {sol.C_vals[i0], sol.D_vals[i0]};

    const double h = sol.grid[i1] - sol.grid[i0];
    const double t = (s - sol.grid[i0]) / h;
    const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    const double h10 = t * (1.0 - t) * (1.0 - t);
    const double h01 = t * t * (3.0 - 2.0 * t);
    const double h11 = t * t * (t - 1.0);
    auto hermite = [&](const cplx& y0, const cplx& d0, const cplx& y1, const cplx& d1) {
        return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    };

    cplx C = hermite(sol.C_vals[i0], sol.dC_vals[i0], sol.C_vals[i1], sol.dC_vals[i1]);
    std::vector<cplx> D(sol.D_vals[i0].size());
    for (std::size_t j = 0; j < D.size(); ++j) {
        D[j] = hermite(sol.D_vals[i0][j], sol.dD_vals[i0][j], sol.D_vals[i1][j], sol.dD_vals[i1][j]);
    }
    return {C, std::move(D)};
}

cplx char_fn_riccati(const RiccatiSolution& sol, std::span<const double> x, double s) {
    auto [C, D] = interpolate_cd(sol, s);
    cplx expo = C;
    for (std::size_t j = 0; j < D.size(); ++j) expo += x[j] * D[j];
    return std::exp(expo);
}

EtaSelection select_eta(const GeneratorSpec& gen, const RiccatiSolution& sol) {
    return select_eta(gen, sol.u, sol.d_star, DStarSource::oracle);
}

} // namespace holoseries
