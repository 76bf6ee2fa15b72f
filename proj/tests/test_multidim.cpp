#include "holoseries/log_affine.hpp"
#include "holoseries/mc.hpp"
#include "holoseries/riccati.hpp"
#include "holoseries/series.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

using namespace holoseries;
using namespace holoseries::testing;

namespace {

/// Two-dimensional affine model with cross drift, correlated diffusion and
/// a point jump: dX1 = -X1 dt + ..., dX2 = (X1 - X2) dt + ...,
/// a = [[1, 0.2], [0.2, 0.8]], jumps at rate 0.5 of size (0.1, 0.2).
ModelParts cross_model(int k_max = 8, bool with_jumps = true) {
    ModelParts m;
    m.n = 2;
    m.drift_const = {0.0, 0.0};
    m.drift_linear = {{-1.0, 0.0}, {1.0, -1.0}};
    m.diff_const = {{1.0, 0.2}, {0.2, 0.8}};
    m.diff_linear = {std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0)),
                     std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0))};
    m.domain = Box{{-1.0, -1.0}, {1.0, 1.0}};
    m.k_max = k_max;
    if (with_jumps) {
        JumpSpec js;
        js.lambda0 = 0.5;
        js.lambda1 = {0.0, 0.0};
        JumpLaw law;
        law.type = JumpLaw::Type::dirac;
        law.point = {0.1, 0.2};
        for (const MultiIndex& alpha : enumerate_multiindices(2, k_max)) {
            if (alpha.order() >= 2) js.moments[alpha] = law.raw_moment(alpha);
        }
        m.jumps = std::move(js);
    }
    return m;
}

JumpLaw cross_law() {
    JumpLaw law;
    law.type = JumpLaw::Type::dirac;
    law.point = {0.1, 0.2};
    return law;
}

} // namespace

TEST_CASE("two-dimensional series agrees with the ode oracle") {
    const GeneratorSpec gen = build_generator(cross_model());
    const std::vector<double> u{1.0, -0.5};
    const SeriesExpansion h = h_sequence(gen, u, 1.0, 40);
    const RiccatiSolution sol = solve_riccati(gen, u, 1.0, 1e-10);
    EvalOptions opts;
    opts.tol = 1e-12;
    opts.max_terms = 60;
    for (const double s : {0.1, 0.4, 1.0}) {
        for (const std::vector<double>& x :
             {std::vector<double>{0.3, -0.2}, std::vector<double>{-0.6, 0.5}}) {
            const cplx series = q_series_eval(h, x, s, opts).value;
            const cplx oracle = char_fn_riccati(sol, x, s);
            CHECK(cnorm(series, oracle) <= 1e-8);
        }
    }
}

TEST_CASE("two-dimensional degree and affinity structure") {
    const GeneratorSpec gen = build_generator(cross_model());
    const std::vector<double> u{0.8, 1.2};
    const SeriesExpansion h = h_sequence(gen, u, 1.0, 15);
    for (int r = 0; r <= 15; ++r) CHECK(h.coeffs[static_cast<std::size_t>(r)].degree() <= r);

    const RhoSeries rho = rho_sequence(h, 15);
    CHECK(cnorm(rho.rho1[0][0], cplx(0.0, 0.8)) == 0.0);
    CHECK(cnorm(rho.rho1[0][1], cplx(0.0, 1.2)) == 0.0);
    for (int k = 1; k <= 15; ++k) CHECK(rho.affinity_residuals[static_cast<std::size_t>(k)] <= 1e-9);

    const RiccatiSolution sol = solve_riccati(gen, u, 1.0, 1e-10);
    for (const double s : {0.25, 0.75}) {
        const LogAffineExponent cd = cd_from_h(h, s);
        const auto [C_ode, D_ode] = interpolate_cd(sol, s);
        CHECK(cnorm(cd.C, C_ode) <= 1e-6);
        CHECK(cnorm(cd.D[0], D_ode[0]) <= 1e-6);
        CHECK(cnorm(cd.D[1], D_ode[1]) <= 1e-6);
    }
}

TEST_CASE("two-dimensional monte carlo guard") {
    const ModelParts parts = cross_model(6);
    const GeneratorSpec gen = build_generator(parts);
    const std::vector<double> u{1.0, -0.5}, x{0.3, -0.2};
    const double s = 0.5;

    const SeriesExpansion h = h_sequence(gen, u, 1.0, 40);
    const cplx series = q_series_eval(h, x, s).value;

    SdeModel sde;
    sde.n = 2;
    sde.drift_const = parts.drift_const;
    sde.drift_linear = parts.drift_linear;
    sde.diff_const = parts.diff_const;
    sde.diff_linear = parts.diff_linear;
    SdeModel::Jumps j;
    j.lambda0 = 0.5;
    j.lambda1 = {0.0, 0.0};
    j.law = cross_law();
    sde.jumps = std::move(j);

    const PathEnsemble paths = simulate_paths(sde, x, s, 20000, s / 64.0, 13579);
    const MCEstimate est = mc_char_fn(paths, u);
    CHECK(cnorm(est.value, series) <= 3.0 * est.se + 2e-3);
    CHECK(est.clamp_fraction == 0.0);
}
