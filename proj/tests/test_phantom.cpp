#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctedge/errors.hpp"
#include "ctedge/phantom.hpp"
#include "ctedge/rng.hpp"

using ctedge::Disk;
using ctedge::Phantom;
using ctedge::Vec2;

namespace {

Phantom reference_disk() {
    return Phantom::single_disk({0.0, -0.1}, 0.345, 1.0);
}

// Midpoint-rule line integration of eval() along the line
// {x : (cos a, sin a) . x = p}; brute-force oracle for radon().
double line_integral_oracle(const Phantom& ph, double alpha, double p,
                            double h) {
    const Vec2 dir = ctedge::unit_vector(alpha);
    const Vec2 tangent = ctedge::perp(dir);
    const double L = ph.support_radius() + 0.1;
    double acc = 0.0;
    const int n = static_cast<int>(2.0 * L / h);
    for (int i = 0; i < n; ++i) {
        const double s = -L + (i + 0.5) * h;
        acc += ph.eval(p * dir + s * tangent);
    }
    return acc * h;
}

} // namespace

TEST_CASE("construction guards") {
    CHECK_THROWS_AS(Phantom::single_disk({0.0, 0.0}, -0.1, 1.0),
                    ctedge::ConfigError);
    CHECK_THROWS_AS(Phantom::single_disk({0.8, 0.0}, 0.3, 1.0),
                    ctedge::ConfigError);
    CHECK_NOTHROW(Phantom::single_disk({0.8, 0.0}, 0.3, 1.0, 2.0));
    CHECK_NOTHROW(Phantom(std::vector<Disk>{}));
}

TEST_CASE("eval sums disk indicators") {
    const Phantom ph = reference_disk();
    CHECK(ph.eval({0.0, -0.1}) == 1.0);
    CHECK(ph.eval({1.0, 1.0}) == 0.0);
    CHECK(ph.eval({0.345, -0.1}) == 1.0); // boundary counts as inside

    const Phantom two({Disk{{0.0, 0.0}, 0.4, 1.0}, Disk{{0.2, 0.0}, 0.4, 2.0}});
    CHECK(two.eval({0.1, 0.0}) == 3.0);
    CHECK(two.eval({-0.3, 0.0}) == 1.0);
    CHECK(two.eval({0.55, 0.0}) == 2.0);
}

TEST_CASE("radon has exact chord values") {
    const Phantom ph = reference_disk();
    CHECK(ph.radon(0.0, 0.0) == doctest::Approx(0.69).epsilon(1e-14));
    CHECK(ph.radon(0.0, 0.345) == doctest::Approx(0.0));
    // |offset| = R/2 -> chord 2 R sqrt(3)/2, any angle.
    const double expect = 2.0 * 0.345 * std::sqrt(3.0) / 2.0;
    for (double alpha : {0.0, 0.7, 2.1}) {
        const Vec2 dir = ctedge::unit_vector(alpha);
        const double p = dir.dot({0.0, -0.1}) + 0.345 / 2.0;
        CHECK(ph.radon(alpha, p) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("radon agrees with line integration of eval") {
    const Phantom ph = reference_disk();
    for (auto [alpha, p] : {std::pair{0.0, 0.0}, std::pair{0.9, 0.1},
                            std::pair{2.4, -0.2}, std::pair{5.0, 0.3}}) {
        const double oracle = line_integral_oracle(ph, alpha, p, 2e-5);
        CHECK(ph.radon(alpha, p) == doctest::Approx(oracle).epsilon(2e-4));
    }
}

TEST_CASE("radon parity, linearity, and empty lines") {
    const Phantom ph({Disk{{0.1, 0.2}, 0.3, 1.5}, Disk{{-0.4, 0.0}, 0.2, -0.7}});
    ctedge::CounterRng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double alpha = (2.0 * rng.uniform(0, i) - 1.0) * M_PI;
        const double p = (2.0 * rng.uniform(1, i) - 1.0);
        CHECK(ph.radon(alpha + M_PI, -p) ==
              doctest::Approx(ph.radon(alpha, p)).epsilon(1e-12));
    }
    // Linearity in amplitudes.
    const Phantom a({Disk{{0.1, 0.2}, 0.3, 1.0}});
    const Phantom b({Disk{{-0.4, 0.0}, 0.2, 1.0}});
    for (int i = 0; i < 50; ++i) {
        const double alpha = 6.0 * rng.uniform(2, i);
        const double p = (2.0 * rng.uniform(3, i) - 1.0);
        CHECK(ph.radon(alpha, p) ==
              doctest::Approx(1.5 * a.radon(alpha, p) -
                              0.7 * b.radon(alpha, p))
                  .epsilon(1e-13));
    }
    // A line missing every disk integrates to exactly zero.
    CHECK(ph.radon(0.0, 0.95) == 0.0);
    CHECK(ph.radon(1.3, -0.99) == 0.0);
}

TEST_CASE("boundary points carry outward normals and signed jumps") {
    const Phantom ph = reference_disk();
    const auto e0 = ph.boundary_point(0, 0.0);
    CHECK(e0.x0.x == doctest::Approx(0.345));
    CHECK(e0.x0.y == doctest::Approx(-0.1));
    CHECK(e0.theta0.x == doctest::Approx(1.0));
    CHECK(e0.theta0.y == doctest::Approx(0.0));
    CHECK(e0.delta_f == doctest::Approx(-1.0));

    const auto e1 = ph.boundary_point(0, M_PI / 2.0);
    CHECK(e1.x0.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e1.x0.y == doctest::Approx(0.245));
    CHECK(e1.theta0.norm() == doctest::Approx(1.0).epsilon(1e-13));

    const Phantom neg = Phantom::single_disk({0.0, -0.1}, 0.345, -2.0);
    CHECK(neg.boundary_point(0, 0.0).delta_f == doctest::Approx(2.0));

    // Jump equals eval just outside minus eval just inside along theta0.
    const double t = 1e-6;
    const double outside = ph.eval(e0.x0 + t * e0.theta0);
    const double inside = ph.eval(e0.x0 - t * e0.theta0);
    CHECK(outside - inside == doctest::Approx(e0.delta_f));
}

TEST_CASE("boundary point on a second disk boundary is rejected") {
    // Second disk's boundary passes exactly through (0.345, -0.1).
    const Phantom ph({Disk{{0.0, -0.1}, 0.345, 1.0},
                      Disk{{0.845, -0.1}, 0.5, 1.0}},
                     2.0);
    CHECK_THROWS_AS(ph.boundary_point(0, 0.0), ctedge::ConfigError);
    CHECK_NOTHROW(ph.boundary_point(0, M_PI));
    CHECK_THROWS_AS(ph.boundary_point(7, 0.0), ctedge::ConfigError);
}

TEST_CASE("admissibility report") {
    const Phantom ph = reference_disk();
    const auto e = ph.boundary_point(0, 0.0);

    const auto good =
        ctedge::admissibility_report(e.x0, e.theta0, 2.0 * M_PI, ph);
    CHECK(good.verdict == "pass (advisory)");
    CHECK(good.curvature_nonzero);
    CHECK(good.inside_support);
    CHECK(good.value_norm ==
          doctest::Approx(2.0 * M_PI * std::hypot(0.345, 0.1)));
    CHECK(good.rational_gap_norm > 1e-3);

    // kappa |x0| = 1/2 exactly rational -> warn.
    const Phantom unit = Phantom::single_disk({0.0, 0.0}, 0.5, 1.0);
    const auto warn = ctedge::admissibility_report({0.5, 0.0}, {1.0, 0.0},
                                                   1.0, unit);
    CHECK(warn.verdict == "warn");
    CHECK(warn.rational_gap_norm == doctest::Approx(0.0));

    const auto fail = ctedge::admissibility_report({1.5, 0.0}, {1.0, 0.0},
                                                   2.0 * M_PI, ph);
    CHECK(fail.verdict.substr(0, 4) == "fail");
}
