#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "latstab/design.hpp"
#include "latstab/vehicle.hpp"
#include "oracles.hpp"

using namespace latstab;

TEST_CASE("build_matrices reproduces the benchmark entries") {
    const VehicleParams p = fixtures::mkz_params();
    const SystemMatrices s = build_matrices(p);

    CHECK(s.M(0, 0) == doctest::Approx(1896.0));
    CHECK(s.M(1, 1) == doctest::Approx(3803.0));
    CHECK(s.M(0, 1) == 0.0);
    CHECK(s.M(1, 0) == 0.0);

    CHECK(s.C(0, 0) == doctest::Approx(78190.0));
    CHECK(s.C(0, 1) == doctest::Approx(-9.680942e3).epsilon(1e-6));
    CHECK(s.C(1, 0) == doctest::Approx(s.C(0, 1)));  // symmetric

    CHECK(s.L(0, 0) == 0.0);
    CHECK(s.L(1, 0) == 0.0);
    CHECK(s.L(0, 1) == doctest::Approx(-781900.0));

    CHECK(s.B[0] == doctest::Approx(4.0e5));
    CHECK(s.B[1] == doctest::Approx(5.0728e5));
    CHECK(s.F[0] == doctest::Approx(9.279058e4).epsilon(1e-6));
    CHECK(s.F[1] == doctest::Approx(p.a * p.a * p.cf + p.b * p.b * p.cr));
}

TEST_CASE("build_matrices rejects non-positive parameters") {
    VehicleParams p = fixtures::mkz_params();
    p.m = 0.0;
    CHECK_THROWS_AS((void)build_matrices(p), std::invalid_argument);
    p = fixtures::mkz_params();
    p.vx = -1.0;
    CHECK_THROWS_AS((void)build_matrices(p), std::invalid_argument);
    p = fixtures::mkz_params();
    p.cr = -10.0;
    CHECK_THROWS_AS((void)build_matrices(p), std::invalid_argument);
}

TEST_CASE("speed scaling enters the matrices exactly as prescribed") {
    const VehicleParams p1 = fixtures::mkz_params(10.0);
    VehicleParams p2 = p1;
    p2.vx = 25.0;
    const SystemMatrices s1 = build_matrices(p1);
    const SystemMatrices s2 = build_matrices(p2);
    const double lam = p2.vx / p1.vx;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(s2.C(i, j) == doctest::Approx(s1.C(i, j) / lam).epsilon(1e-12));
    CHECK(s2.F[0] - (p1.a * p1.cf - p1.b * p1.cr) ==
          doctest::Approx(lam * lam * (s1.F[0] - (p1.a * p1.cf - p1.b * p1.cr))).epsilon(1e-12));
    CHECK(s2.F[1] == doctest::Approx(s1.F[1]));
    CHECK(s2.L(0, 1) == doctest::Approx(s1.L(0, 1)));
}

TEST_CASE("error_accel equilibrium and forcing-only cases") {
    const SystemMatrices s = build_matrices(fixtures::mkz_params());
    const Vec2 zero = error_accel(s, ErrorState{}, 0.0, 0.0);
    CHECK(zero[0] == 0.0);
    CHECK(zero[1] == 0.0);

    const double kappa0 = 0.01;
    const Vec2 forced = error_accel(s, ErrorState{}, 0.0, kappa0);
    const double vx2 = s.vx * s.vx;
    CHECK(forced[0] == doctest::Approx(-s.F[0] * kappa0 / (vx2 * s.M(0, 0))).epsilon(1e-12));
    CHECK(forced[1] == doctest::Approx(-s.F[1] * kappa0 / (vx2 * s.M(1, 1))).epsilon(1e-12));
}

TEST_CASE("error_accel against an independent linear-solve oracle") {
    const SystemMatrices s = build_matrices(fixtures::mkz_params());
    const ErrorState st{0.1, 0.02, 0.0, 0.0};
    const double u = 0.01, hp = 0.005;
    const Vec2 got = error_accel(s, st, u, hp);

    // Assemble the right-hand side by hand and solve vx^2 M x = rhs by
    // Gaussian elimination.
    const double vx = s.vx;
    Vec2 rhs;
    for (int i = 0; i < 2; ++i) {
        rhs[i] = s.B[i] * u - s.F[i] * hp;
        rhs[i] -= vx * (s.C(i, 0) * st.lat_prime + s.C(i, 1) * st.heading_prime);
        rhs[i] -= s.L(i, 0) * st.lat + s.L(i, 1) * st.heading;
    }
    Mat2 lhs;
    lhs(0, 0) = vx * vx * s.M(0, 0);
    lhs(1, 1) = vx * vx * s.M(1, 1);
    lhs(0, 1) = lhs(1, 0) = 0.0;
    const Vec2 want = oracles::solve_gauss(lhs, rhs);
    CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-12));
    CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-12));
}

TEST_CASE("error_accel is linear in the stacked input") {
    const SystemMatrices s = build_matrices(fixtures::mkz_params());
    for (int trial = 0; trial < 50; ++trial) {
        const ErrorState st{oracles::uniform(-0.5, 0.5), oracles::uniform(-0.2, 0.2),
                            oracles::uniform(-0.1, 0.1), oracles::uniform(-0.05, 0.05)};
        const double u = oracles::uniform(-0.1, 0.1);
        const double hp = oracles::uniform(-0.05, 0.05);
        const double alpha = oracles::uniform(-3.0, 3.0);
        const ErrorState scaled{alpha * st.lat, alpha * st.heading, alpha * st.lat_prime,
                                alpha * st.heading_prime};
        const Vec2 base = error_accel(s, st, u, hp);
        const Vec2 big = error_accel(s, scaled, alpha * u, alpha * hp);
        CHECK(big[0] == doctest::Approx(alpha * base[0]).epsilon(1e-9));
        CHECK(big[1] == doctest::Approx(alpha * base[1]).epsilon(1e-9));
    }
}

TEST_CASE("open-loop steady state is never unique") {
    const SystemMatrices s = build_matrices(fixtures::mkz_params());
    CHECK_FALSE(steady_state_error(s, 0.01, 0.002).has_value());
}

TEST_CASE("closed-loop steady state: zero input and the tuned-feedforward arc") {
    const VehicleParams p = fixtures::mkz_params();
    const SystemMatrices s = build_matrices(p);
    const GainSet g = fixtures::designed_lfp_gains();

    const auto rest = closed_loop_steady_state(s, g.kp, 0.0, 0.0);
    REQUIRE(rest.has_value());
    CHECK(rest->lat == doctest::Approx(0.0));
    CHECK(rest->heading == doctest::Approx(0.0));

    // On a constant-curvature path with the tuned feedforward gain the
    // steady-state lateral error vanishes while the heading error does not.
    const double kappa0 = 0.002;
    const double kff = kff_formula(p, g.kp[1]);
    const auto ss = closed_loop_steady_state(s, g.kp, kff * kappa0, kappa0);
    REQUIRE(ss.has_value());
    CHECK(std::abs(ss->lat) < 1e-9 * std::abs(ss->heading));
    CHECK(std::abs(ss->heading) > 1e-6);

    // Independent oracle: Gaussian elimination on (L + B K_P) e = rhs.
    const Mat2 stiff = s.L + outer(s.B, g.kp);
    const Vec2 rhs = (kff * kappa0) * s.B - kappa0 * s.F;
    const Vec2 want = oracles::solve_gauss(stiff, rhs);
    CHECK(ss->lat == doctest::Approx(want[0]).epsilon(1e-10));
    CHECK(ss->heading == doctest::Approx(want[1]).epsilon(1e-10));
}

TEST_CASE("closed-loop steady state flags singular stiffness") {
    const SystemMatrices s = build_matrices(fixtures::mkz_params());
    // K_P = 0 leaves the open-loop L, whose first column is zero.
    CHECK_FALSE(closed_loop_steady_state(s, Vec2{0.0, 0.0}, 0.01, 0.0).has_value());
}
