#include "holoseries/errors.hpp"
#include "holoseries/riccati.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

using namespace holoseries;
using namespace holoseries::testing;

TEST_CASE("riccati right-hand side") {
    SUBCASE("zero generator") {
        GeneratorSpec gen(1, 2, Box{{-1.0}, {1.0}}, {});
        auto [dC, dD] = riccati_rhs(gen, std::vector<cplx>{cplx(0.0, 1.0)});
        CHECK(cnorm(dC, cplx(0.0)) == 0.0);
        CHECK(cnorm(dD[0], cplx(0.0)) == 0.0);
    }
    SUBCASE("brownian at y = i") {
        const GeneratorSpec gen = build_generator(brownian_parts());
        auto [dC, dD] = riccati_rhs(gen, std::vector<cplx>{cplx(0.0, 1.0)});
        CHECK(cnorm(dC, cplx(-0.5, 0.0)) < 1e-15);
        CHECK(cnorm(dD[0], cplx(0.0)) == 0.0);
    }
    SUBCASE("ou at y = i") {
        const GeneratorSpec gen = build_generator(ou_parts());
        auto [dC, dD] = riccati_rhs(gen, std::vector<cplx>{cplx(0.0, 1.0)});
        CHECK(cnorm(dC, cplx(-1.0, 0.0)) < 1e-15);
        CHECK(cnorm(dD[0], cplx(0.0, -1.0)) < 1e-15);
    }
}

TEST_CASE("integration against closed forms") {
    SUBCASE("brownian: constant D, linear C") {
        const GeneratorSpec gen = build_generator(brownian_parts());
        const RiccatiSolution sol = solve_riccati(gen, std::vector<double>{1.0}, 2.0, 1e-9);
        CHECK(!sol.blow_up_time);
        CHECK(sol.grid.front() == 0.0);
        CHECK(sol.grid.back() == doctest::Approx(2.0));
        for (const double s : {0.3, 1.0, 2.0}) {
            auto [C, D] = interpolate_cd(sol, s);
            CHECK(cnorm(C, cplx(-s / 2.0, 0.0)) < 1e-9);
            CHECK(cnorm(D[0], cplx(0.0, 1.0)) < 1e-12);
        }
        CHECK(sol.d_star == doctest::Approx(1.0));
    }
    SUBCASE("ou closed form within tolerance") {
        const GeneratorSpec gen = build_generator(ou_parts());
        const double rtol = 1e-9;
        const RiccatiSolution sol = solve_riccati(gen, std::vector<double>{1.0}, 2.0, rtol);
        for (const double s : {0.5, 1.0, 2.0}) {
            auto [C, D] = interpolate_cd(sol, s);
            CHECK(cnorm(D[0], cplx(0.0, std::exp(-s))) <= 10.0 * rtol);
            CHECK(cnorm(C, cplx(-(1.0 - std::exp(-2.0 * s)) / 2.0, 0.0)) <= 10.0 * rtol);
        }
    }
    SUBCASE("square-root model matches the known log-affine exponent") {
        const GeneratorSpec gen = build_generator(cir_parts());
        const RiccatiSolution sol = solve_riccati(gen, std::vector<double>{1.0}, 2.0, 1e-9);
        for (const double s : {0.25, 0.8, 1.5, 2.0}) {
            auto [C, D] = interpolate_cd(sol, s);
            auto [C_ref, D_ref] = cir_cd(s, 1.0);
            CHECK(cnorm(C, C_ref) <= 1e-6);
            CHECK(cnorm(D[0], D_ref) <= 1e-6);
        }
    }
}

TEST_CASE("self-convergence under rtol refinement") {
    const GeneratorSpec gen = build_generator(cir_parts());
    const std::vector<double> u{2.0};
    const double rtol = 1e-8;
    const RiccatiSolution a = solve_riccati(gen, u, 2.0, rtol);
    const RiccatiSolution b = solve_riccati(gen, u, 2.0, rtol / 2.0);
    auto [Ca, Da] = interpolate_cd(a, 2.0);
    auto [Cb, Db] = interpolate_cd(b, 2.0);
    const double scale = std::max(1.0, std::abs(Ca));
    CHECK(cnorm(Ca, Cb) <= 10.0 * rtol * scale);
    CHECK(cnorm(Da[0], Db[0]) <= 10.0 * rtol * scale);
}

TEST_CASE("transform evaluation from trajectories") {
    SUBCASE("s = 0 is the plane wave") {
        const GeneratorSpec gen = build_generator(ou_parts());
        const RiccatiSolution sol = solve_riccati(gen, std::vector<double>{2.0}, 1.0, 1e-9);
        CHECK(cnorm(char_fn_riccati(sol, std::vector<double>{0.3}, 0.0), std::polar(1.0, 0.6)) <
              1e-14);
    }
    SUBCASE("brownian value") {
        const GeneratorSpec gen = build_generator(brownian_parts());
        const RiccatiSolution sol = solve_riccati(gen, std::vector<double>{1.0}, 1.0, 1e-9);
        CHECK(cnorm(char_fn_riccati(sol, std::vector<double>{0.0}, 0.5),
                    cplx(std::exp(-0.25), 0.0)) < 1e-9);
    }
    SUBCASE("ou value at x = 1, s = 1") {
        const GeneratorSpec gen = build_generator(ou_parts());
        const RiccatiSolution sol = solve_riccati(gen, std::vector<double>{1.0}, 1.0, 1e-9);
        CHECK(cnorm(char_fn_riccati(sol, std::vector<double>{1.0}, 1.0), ou_cf(1.0, 1.0, 1.0)) <
              1e-9);
    }
    SUBCASE("past the grid is an error") {
        const GeneratorSpec gen = build_generator(ou_parts());
        const RiccatiSolution sol = solve_riccati(gen, std::vector<double>{1.0}, 1.0, 1e-9);
        CHECK_THROWS_AS(char_fn_riccati(sol, std::vector<double>{0.0}, 1.5), NumericError);
    }
}

TEST_CASE("blow-up detection") {
    // dD/ds = -D^3 from D(0) = i explodes at s = 1/2
    std::map<MultiIndex, AffinePair, GradedLexLess> coeffs;
    AffinePair cubic;
    cubic.c = 0.0;
    cubic.d = {-1.0};
    coeffs.emplace(MultiIndex(std::vector<int>{3}), cubic);
    GeneratorSpec gen(1, 3, Box{{-1.0}, {1.0}}, std::move(coeffs));

    const RiccatiSolution sol = solve_riccati(gen, std::vector<double>{1.0}, 2.0, 1e-9, 1e8);
    REQUIRE(sol.blow_up_time.has_value());
    CHECK(*sol.blow_up_time == doctest::Approx(0.5).epsilon(0.02));
    CHECK_THROWS_AS(char_fn_riccati(sol, std::vector<double>{0.0}, 0.75), NumericError);
    // before the blow-up the trajectory is still queryable
    CHECK(std::abs(char_fn_riccati(sol, std::vector<double>{0.0}, 0.1)) > 0.0);
}

TEST_CASE("input validation") {
    const GeneratorSpec gen = build_generator(ou_parts());
    CHECK_THROWS_AS(solve_riccati(gen, std::vector<double>{1.0, 2.0}, 1.0, 1e-9), ConfigError);
    CHECK_THROWS_AS(solve_riccati(gen, std::vector<double>{1.0}, -1.0, 1e-9), ConfigError);
    CHECK_THROWS_AS(solve_riccati(gen, std::vector<double>{1.0}, 1.0, 0.0), ConfigError);
}
