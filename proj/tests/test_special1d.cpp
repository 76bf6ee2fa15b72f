#include "holoseries/errors.hpp"
#include "holoseries/series.hpp"
#include "holoseries/special1d.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace holoseries;
using namespace holoseries::testing;

namespace {

Special1DModel pure_diffusion() {
    Special1DModel m;
    m.lambda0 = 1.0;
    m.lambda1 = 0.0;
    m.drift_scale = 0.0;
    m.diff_scale = 1.0;
    m.k_max = 12;
    return m;
}

Special1DModel affine_jump_model() {
    Special1DModel m;
    m.lambda0 = 0.5;
    m.lambda1 = 0.25;
    m.drift_scale = 0.0;
    m.diff_scale = 0.0;
    m.jump_moments.assign(16, 1.0);  // mu = delta_1
    m.k_max = 12;
    return m;
}

Special1DModel mixed_model() {
    Special1DModel m;
    m.lambda0 = 0.4;
    m.lambda1 = 0.3;
    m.drift_scale = 0.2;
    m.diff_scale = 0.5;
    m.jump_moments.assign(16, 1.0);
    m.k_max = 12;
    return m;
}

} // namespace

TEST_CASE("symbol series frak_h") {
    SUBCASE("value at u = 0 is eta_0 = 0") {
        CHECK(cnorm(frak_h(mixed_model(), 0.0, 0), cplx(0.0)) == 0.0);
    }
    SUBCASE("pure diffusion: frak_h(u) = -u^2/2") {
        const Special1DModel m = pure_diffusion();
        for (const double u : {0.5, 1.0, 2.0}) {
            CHECK(cnorm(frak_h(m, u, 0), cplx(-u * u / 2.0, 0.0)) < 1e-15);
        }
    }
    SUBCASE("pure diffusion first derivative: iu") {
        const Special1DModel m = pure_diffusion();
        CHECK(cnorm(frak_h(m, 1.0, 1), cplx(0.0, 1.0)) < 1e-15);
        CHECK(cnorm(frak_h(m, -2.0, 1), cplx(0.0, -2.0)) < 1e-15);
    }
    SUBCASE("second derivative of the diffusion part is the constant weight") {
        const Special1DModel m = pure_diffusion();
        CHECK(cnorm(frak_h(m, 3.0, 2), cplx(1.0, 0.0)) < 1e-15);  // eta_2 * 2! = 1
    }
}

TEST_CASE("pi table entries") {
    const PiTable table = pi_table(8, PiNormalization::as_printed);
    SUBCASE("no-pair entries are 1") {
        for (int p = 1; p <= 8; ++p) CHECK(table.entry(p, {}) == 1);
    }
    SUBCASE("p = 0 with pairs is 0") {
        CHECK(table.entry(0, {{1, 1}}) == 0);
    }
    SUBCASE("one reduction step: pi^(1)_{(1,1)} = 1") {
        CHECK(table.entry(1, {{1, 1}}) == 1);
    }
    SUBCASE("rule I: m = 0 pairs are dropped from the key") {
        CHECK(table.entry(3, {{2, 0}}) == 1);
        CHECK(table.entry(2, {{1, 1}, {3, 0}}) == table.entry(2, {{1, 1}}));
        CHECK(table.entry(1, {{2, 1}, {5, 0}}) == table.entry(1, {{2, 1}}));
    }
    SUBCASE("entries are exact integers, order-insensitive keys") {
        CHECK(table.entry(2, {{1, 1}, {2, 1}}) == table.entry(2, {{2, 1}, {1, 1}}));
    }
}

TEST_CASE("partition enumeration matches a brute-force count") {
    // independent enumeration: dense multiplicity vectors m_1..m_M with sum j m_j = M
    auto brute_count = [](int r) {
        long total = 0;
        for (int p = 1; p <= r; ++p) {
            const int M = r - p;
            std::vector<int> mult(static_cast<std::size_t>(M) + 1, 0);
            auto rec = [&](auto&& self, int j, int rem) -> void {
                if (j > M) {
                    if (rem == 0) ++total;
                    return;
                }
                for (int m = 0; m * j <= rem; ++m) {
                    self(self, j + 1, rem - m * j);
                }
            };
            if (M == 0) {
                ++total;
            } else {
                rec(rec, 1, M);
            }
        }
        return total;
    };
    for (int r = 1; r <= 10; ++r) {
        CHECK(static_cast<long>(gr_partitions(r).size()) == brute_count(r));
    }
}

TEST_CASE("pure intensity model keeps only the p = r partition") {
    // lambda1 = 0 wipes every term with p < r
    Special1DModel m = affine_jump_model();
    m.lambda1 = 0.0;
    const PiTable table = pi_table(6, PiNormalization::as_printed);
    for (int r = 1; r <= 6; ++r) {
        double r_fact = 1.0;
        for (int i = 2; i <= r; ++i) r_fact *= i;
        const cplx expected =
            ipow(cplx(m.lambda0, 0.0) * frak_h(m, 1.3, 0), r) / r_fact;  // as printed
        CHECK(cnorm(g_r_explicit(m, 1.3, 0.8, r, table), expected) <
              1e-13 * (1.0 + std::abs(expected)));
    }
}

TEST_CASE("calibration against the general recursion") {
    const PiTable table = pi_table(8, PiNormalization::calibrated);

    SUBCASE("the r = 2 normalization discrepancy is exactly 2") {
        CHECK(table.calibration_factor(2) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("fitted factors equal r!") {
        double r_fact = 1.0;
        for (int r = 1; r <= 8; ++r) {
            r_fact *= r;
            CHECK(table.calibration_factor(r) == doctest::Approx(r_fact).epsilon(1e-9));
        }
    }
    SUBCASE("report documents the discrepancy") {
        const std::string report = table.calibration_report();
        CHECK(report.find("r=2") != std::string::npos);
        CHECK(report.find("calibrated") != std::string::npos);
    }

    SUBCASE("cross-validation on three models at random points") {
        std::mt19937_64 rng(612);
        std::uniform_real_distribution<double> xd(-1.0, 1.0);
        std::uniform_real_distribution<double> ud(-2.0, 2.0);
        for (const Special1DModel& m : {pure_diffusion(), affine_jump_model(), mixed_model()}) {
            const GeneratorSpec gen = m.to_generator(Special1DModel::default_domain());
            const GrowthProfile prof = growth_profile(gen);
            for (int trial = 0; trial < 10; ++trial) {
                const double x = xd(rng);
                const double u = ud(rng);
                const std::vector<double> xv{x}, uv{u};
                const SeriesExpansion g = g_sequence(gen, uv, 8);
                for (int r = 1; r <= 8; ++r) {
                    const double bound = coefficient_bound(prof, 1, xv, uv, r);
                    const cplx truth = g.coeffs[static_cast<std::size_t>(r)].eval(xv);
                    const cplx closed = g_r_explicit(m, u, x, r, table);
                    CHECK(cnorm(truth, closed) <= 1e-9 * bound);
                }
            }
        }
    }
}

TEST_CASE("as-printed mode is reported, never silently corrected") {
    const PiTable printed = pi_table(4, PiNormalization::as_printed);
    CHECK(printed.calibration_factor(3) == 1.0);
    CHECK(printed.calibration_report().find("as printed") != std::string::npos);

    // at r = 2 the as-printed sum is half the recursion value
    const Special1DModel m = mixed_model();
    const GeneratorSpec gen = m.to_generator(Special1DModel::default_domain());
    const SeriesExpansion g = g_sequence(gen, std::vector<double>{0.9}, 2);
    const cplx truth = g.coeffs[2].eval(std::vector<double>{0.2});
    const cplx halved = g_r_explicit(m, 0.9, 0.2, 2, printed);
    CHECK(cnorm(truth, 2.0 * halved) < 1e-12 * (1.0 + std::abs(truth)));
}

TEST_CASE("table range errors") {
    const PiTable table = pi_table(4, PiNormalization::as_printed);
    CHECK_THROWS_AS(g_r_explicit(mixed_model(), 1.0, 0.0, 5, table), ConfigError);
    CHECK_THROWS_AS(table.entry(2, {{3, 4}}), ConfigError);  // total 14 > r_max
    CHECK_THROWS_AS(pi_table(0, PiNormalization::as_printed), ConfigError);
}
