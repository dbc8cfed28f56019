#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ctedge/chebyshev.hpp"
#include "ctedge/errors.hpp"
#include "ctedge/linalg.hpp"
#include "ctedge/quadrature.hpp"

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    // n-point rule: monomial x^k on [0, 1] for k up to 2n-1.
    for (int n : {2, 5, 12}) {
        for (int k = 0; k <= 2 * n - 1; ++k) {
            const double got = ctedge::gl_integrate(
                [&](double x) { return std::pow(x, k); }, 0.0, 1.0, n);
            CHECK(got == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("Gauss-Legendre handles smooth transcendental integrands") {
    const double got = ctedge::gl_integrate(
        [](double x) { return std::cos(x); }, 0.0, 1.0, 16);
    CHECK(got == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
    const double erf1 = ctedge::gl_integrate(
        [](double x) { return 2.0 / std::sqrt(M_PI) * std::exp(-x * x); },
        0.0, 1.0, 24);
    CHECK(erf1 == doctest::Approx(std::erf(1.0)).epsilon(1e-15));
}

TEST_CASE("panel integration and periodic trapezoid") {
    const double panels = ctedge::gl_integrate_panels(
        [](double x) { return std::exp(-x); }, 0.0, 8.0, 12, 10);
    CHECK(panels == doctest::Approx(1.0 - std::exp(-8.0)).epsilon(1e-13));
    // Periodic trapezoid is exact for trigonometric polynomials.
    const double circ = ctedge::periodic_integrate(
        [](double a) { return 1.0 + std::cos(3 * a) + std::sin(7 * a); },
        2.0 * M_PI, 32);
    CHECK(circ == doctest::Approx(2.0 * M_PI).epsilon(1e-13));
}

TEST_CASE("Chebyshev series reproduces smooth functions") {
    auto f = [](double x) { return std::exp(x) * std::cos(2.0 * x); };
    const auto s = ctedge::ChebyshevSeries::fit(f, -1.5, 2.0, 30);
    for (double x : {-1.5, -0.9, -0.2, 0.0, 0.7, 1.3, 2.0}) {
        CHECK(s(x) == doctest::Approx(f(x)).epsilon(1e-12));
    }
}

TEST_CASE("dense solve and Cholesky") {
    std::vector<std::vector<double>> A = {
        {2.0, 1.0, -1.0}, {-3.0, -1.0, 2.0}, {-2.0, 1.0, 2.0}};
    const auto x = ctedge::solve_dense(A, {8.0, -11.0, -3.0});
    CHECK(x[0] == doctest::Approx(2.0));
    CHECK(x[1] == doctest::Approx(3.0));
    CHECK(x[2] == doctest::Approx(-1.0));

    // SPD matrix and its known factor.
    std::vector<double> m = {4.0, 12.0, -16.0, 12.0, 37.0, -43.0,
                             -16.0, -43.0, 98.0};
    ctedge::cholesky_lower(m, 3);
    CHECK(m[0] == doctest::Approx(2.0));
    CHECK(m[3] == doctest::Approx(6.0));
    CHECK(m[4] == doctest::Approx(1.0));
    CHECK(m[6] == doctest::Approx(-8.0));
    CHECK(m[7] == doctest::Approx(5.0));
    CHECK(m[8] == doctest::Approx(3.0));
    CHECK(m[1] == 0.0);

    std::vector<double> bad = {1.0, 2.0, 2.0, 1.0};
    CHECK_THROWS_AS(ctedge::cholesky_lower(bad, 2), ctedge::NumericError);
}

TEST_CASE("symmetric 2x2 operations") {
    const ctedge::SymMat2 m{3.0, 1.0, 2.0};
    const auto inv = m.inverse();
    CHECK(inv.a * m.a + inv.b * m.b == doctest::Approx(1.0));
    CHECK(inv.a * m.b + inv.b * m.c == doctest::Approx(0.0));
    const ctedge::Vec2 v{0.7, -1.2};
    CHECK(m.quad_form(v) ==
          doctest::Approx(v.dot(m.apply(v))).epsilon(1e-14));
    double lo = 0.0, hi = 0.0;
    m.eigen(lo, hi);
    CHECK(lo * hi == doctest::Approx(m.det()));
    CHECK(lo + hi == doctest::Approx(m.trace()));
}
