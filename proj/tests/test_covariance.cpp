#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "ctedge/covariance.hpp"
#include "ctedge/errors.hpp"
#include "ctedge/kernel.hpp"
#include "ctedge/quadrature.hpp"
#include "ctedge/rng.hpp"
#include "ctedge/sampling.hpp"

using ctedge::CovContext;
using ctedge::CovTable;
using ctedge::Kernel;
using ctedge::NoiseModel;
using ctedge::SamplingGrid;
using ctedge::Vec2;
using ctedge::WeightFn;

namespace {

constexpr double kPi = 3.14159265358979323846;

const Kernel& default_kernel() {
    static Kernel k = Kernel::bspline(4);
    return k;
}

SamplingGrid default_grid() { return SamplingGrid::natural(); }

Vec2 reference_point() { return {0.345, -0.1}; }

CovContext constant_ctx(double sigma = std::sqrt(3.0), int n_alpha = 2048) {
    return CovContext(default_kernel(), NoiseModel::constant(sigma), default_grid(),
                      reference_point(), n_alpha);
}

CovContext angular_ctx(double base = 1.7, double mod = 0.35, int n_alpha = 2048) {
    return CovContext(default_kernel(), NoiseModel::angular(base, mod), default_grid(),
                      reference_point(), n_alpha);
}

// Recursive adaptive Simpson; the independent quadrature route for the edge
// coefficient cross-check.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// Closed-form autocorrelation of the weight function,
// w_u(tau) = int u(t) u(t - tau) dt over [-rho, rho] overlaps; used by the
// 1D identity gamma^2 = int C1(tau) w_u(tau) dtau.
double sign_weight_autocorr(double tau, double rho) {
    double a = std::abs(tau);
    if (a >= 2.0 * rho) return 0.0;
    return a <= rho ? 2.0 * rho - 3.0 * a : -(2.0 * rho - a);
}

double linear_weight_autocorr(double tau, double rho) {
    double a = std::abs(tau);
    if (a >= 2.0 * rho) return 0.0;
    // int_{a - rho}^{rho} t (t - a) dt
    auto anti = [&](double t) { return t * t * t / 3.0 - 0.5 * a * t * t; };
    return anti(rho) - anti(a - rho);
}

} // namespace

TEST_CASE("context validation") {
    CHECK_THROWS_AS(constant_ctx(std::sqrt(3.0), 128), ctedge::ConfigError);
    // Parity-violating noise level: sigma(alpha + pi, -p) != sigma(alpha, p).
    CHECK_THROWS_AS(CovContext(default_kernel(),
                               [](double alpha, double) { return 1.0 + 0.5 * std::sin(alpha); },
                               2.0 * kPi, reference_point()),
                    ctedge::ConfigError);
    CHECK_THROWS_AS(CovContext(default_kernel(), [](double, double) { return 1.0; }, 0.0,
                               reference_point()),
                    ctedge::ConfigError);
}

TEST_CASE("covariance is even") {
    const CovContext ctx = angular_ctx();
    const double scale = cov_C(ctx, {0.0, 0.0});
    ctedge::CounterRng rng(41);
    for (int i = 0; i < 20; ++i) {
        double r = 4.0 * rng.uniform(0, i);
        double th = 2.0 * kPi * rng.uniform(1, i);
        Vec2 x = {r * std::cos(th), r * std::sin(th)};
        CHECK(std::abs(ctedge::cov_C(ctx, x) - ctedge::cov_C(ctx, -x)) <= 1e-12 * scale);
    }
}

TEST_CASE("constant noise gives a radial covariance") {
    const CovContext ctx = constant_ctx();
    const double c0 = cov_C(ctx, {0.0, 0.0});
    const double r = 1.3;
    const double ref = cov_C(ctx, {r, 0.0});
    for (int i = 1; i < 16; ++i) {
        double th = 2.0 * kPi * i / 16.0;
        double v = cov_C(ctx, {r * std::cos(th), r * std::sin(th)});
        CHECK(std::abs(v - ref) <= 1e-10 * c0);
    }
}

TEST_CASE("variance at zero separation matches the closed form") {
    const double sigma_sq = 3.0;
    const CovContext ctx = constant_ctx(std::sqrt(sigma_sq));
    const double kappa = default_grid().kappa;
    const double pref = (kappa / (4.0 * kPi)) * (kappa / (4.0 * kPi));
    const double expected = pref * 2.0 * kPi * sigma_sq * (35.0 / 72.0);
    CHECK(cov_C(ctx, {0.0, 0.0}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("1d restriction agrees with the 2d covariance") {
    const CovContext ctx = angular_ctx();
    CHECK(cov_C1(ctx, 0.0, 0.7) == doctest::Approx(cov_C(ctx, {0.0, 0.0})).epsilon(1e-15));
    ctedge::CounterRng rng(77);
    const double scale = cov_C(ctx, {0.0, 0.0});
    for (int i = 0; i < 25; ++i) {
        double t = 8.0 * (rng.uniform(0, i) - 0.5);
        double th = 2.0 * kPi * rng.uniform(1, i);
        double direct = ctedge::cov_C(ctx, {t * std::cos(th), t * std::sin(th)});
        CHECK(std::abs(ctedge::cov_C1(ctx, t, th) - direct) <= 1e-12 * scale);
    }
}

TEST_CASE("1d restriction decays at least like 1/t") {
    const CovContext ctx = constant_ctx();
    const double c0 = cov_C(ctx, {0.0, 0.0});
    double worst = 0.0;
    for (double t = 10.0; t <= 200.0; t += 5.0)
        worst = std::max(worst, std::abs(t * cov_C1(ctx, t, 0.3)));
    CHECK(worst <= c0);
}

TEST_CASE("angular quadrature is spectrally converged") {
    const CovContext coarse = angular_ctx(1.7, 0.35, 2048);
    const CovContext fine = angular_ctx(1.7, 0.35, 4096);
    const double scale = cov_C(coarse, {0.0, 0.0});
    ctedge::CounterRng rng(5);
    for (int i = 0; i < 10; ++i) {
        double r = 5.0 * rng.uniform(0, i);
        double th = 2.0 * kPi * rng.uniform(1, i);
        Vec2 x = {r * std::cos(th), r * std::sin(th)};
        CHECK(std::abs(cov_C(coarse, x) - cov_C(fine, x)) <= 1e-10 * scale);
    }
}

TEST_CASE("segment variance basics") {
    const CovContext ctx = constant_ctx();
    WeightFn zero;
    zero.f = [](double) { return 0.0; };
    CHECK(ctedge::gamma_sq(ctx, zero, 3.0) == 0.0);
    CHECK(ctedge::gamma_sq(ctx, WeightFn::sign(), 3.0) > 0.0);
    CHECK_THROWS_AS(ctedge::gamma_sq(ctx, WeightFn::sign(), -1.0), ctedge::ConfigError);
}

TEST_CASE("segment variance matches the 1d autocorrelation identity") {
    const double rho = 3.0;
    for (bool use_sign : {true, false}) {
        const CovContext ctx = use_sign ? constant_ctx() : angular_ctx();
        const WeightFn u = use_sign ? WeightFn::sign() : WeightFn::linear();
        const double theta0 = 0.6;
        const double direct = ctedge::gamma_sq(ctx, u, rho, theta0);
        // Independent route: collapse the double integral with the exact
        // weight autocorrelation, gamma^2 = int_{-2rho}^{2rho} C1(tau) w(tau) dtau.
        auto w = [&](double tau) {
            return use_sign ? sign_weight_autocorr(tau, rho) : linear_weight_autocorr(tau, rho);
        };
        const double oracle = ctedge::gl_integrate_panels(
            [&](double tau) { return ctedge::cov_C1(ctx, tau, theta0) * w(tau); }, -2.0 * rho,
            2.0 * rho, 40, 24);
        CHECK(direct == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("variance outputs are homogeneous of degree 2 in sigma") {
    const double rho = 3.0;
    const double s = 2.5;
    {
        const CovContext base = constant_ctx(1.1);
        const CovContext scaled = constant_ctx(1.1 * s);
        double g1 = ctedge::gamma_sq(base, WeightFn::linear(), rho);
        double g2 = ctedge::gamma_sq(scaled, WeightFn::linear(), rho);
        CHECK(g2 == doctest::Approx(s * s * g1).epsilon(1e-12));
        ctedge::SymMat2 m1 = ctedge::cov_matrix(base, rho);
        ctedge::SymMat2 m2 = ctedge::cov_matrix(scaled, rho);
        CHECK(m2.a == doctest::Approx(s * s * m1.a).epsilon(1e-12));
        CHECK(m2.c == doctest::Approx(s * s * m1.c).epsilon(1e-12));
    }
    {
        const CovContext base = angular_ctx(1.7, 0.35);
        const CovContext scaled = angular_ctx(1.7 * s, 0.35);
        double g1 = ctedge::gamma_sq(base, WeightFn::sign(), rho);
        double g2 = ctedge::gamma_sq(scaled, WeightFn::sign(), rho);
        CHECK(g2 == doctest::Approx(s * s * g1).epsilon(1e-12));
        ctedge::SymMat2 m1 = ctedge::cov_matrix(base, rho);
        ctedge::SymMat2 m2 = ctedge::cov_matrix(scaled, rho);
        CHECK(m2.a == doctest::Approx(s * s * m1.a).epsilon(1e-12));
        CHECK(m2.b == doctest::Approx(s * s * m1.b).epsilon(1e-12));
        CHECK(m2.c == doctest::Approx(s * s * m1.c).epsilon(1e-12));
    }
}

TEST_CASE("constant noise gives an isotropic matrix") {
    const CovContext ctx = constant_ctx();
    const ctedge::SymMat2 m = ctedge::cov_matrix(ctx, 3.0);
    CHECK(m.a > 0.0);
    CHECK(std::abs(m.b) <= 1e-10 * m.a);
    CHECK(std::abs(m.a - m.c) <= 1e-10 * m.a);
    CHECK(ctedge::nu_sq(ctx, 3.0) == m.a);
}

TEST_CASE("matrix follows the angular second moments of the noise level") {
    const double mod = 0.35;
    const CovContext ctx = angular_ctx(1.7, mod);
    const ctedge::SymMat2 m = ctedge::cov_matrix(ctx, 3.0);
    // sigma(alpha) = base (1 + mod cos 2 alpha) makes the two diagonal
    // second moments proportional to 1 +- mod + mod^2 / 2, and kills the
    // off-diagonal one, independently of the radial factor.
    const double expected_ratio = (1.0 + mod + 0.5 * mod * mod) / (1.0 - mod + 0.5 * mod * mod);
    CHECK(m.a / m.c == doctest::Approx(expected_ratio).epsilon(1e-9));
    CHECK(std::abs(m.b) <= 1e-12 * m.a);
}

TEST_CASE("disk moment agrees with an unsubstituted quadrature") {
    // The implementation maps t = rho sin u before integrating; redo the
    // double integral on the original square with a dense rule.
    const double rho = 3.0;
    const Kernel& k = default_kernel();
    const int n = 400;
    const ctedge::GaussLegendre& gl = ctedge::gauss_legendre(n);
    std::vector<double> t(n), w(n);
    for (int i = 0; i < n; ++i) {
        t[i] = rho * gl.nodes[i];
        w[i] = rho * gl.weights[i] * t[i] * 2.0 * std::sqrt(std::max(0.0, rho * rho - t[i] * t[i]));
    }
    double q_direct = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += w[j] * k.autocorr_dphi(t[i] - t[j]);
        q_direct += w[i] * row;
    }
    // Recover the implementation's Q from the isotropic matrix.
    const double sigma_sq = 3.0;
    const CovContext ctx = constant_ctx(std::sqrt(sigma_sq));
    const double kappa = default_grid().kappa;
    const double pref = (kappa / (4.0 * kPi)) * (kappa / (4.0 * kPi));
    const double q_impl = ctedge::cov_matrix(ctx, rho).a / (pref * sigma_sq * kPi);
    CHECK(q_impl == doctest::Approx(q_direct).epsilon(1e-5));
}

TEST_CASE("interpolation table matches direct evaluation") {
    const CovContext ctx = angular_ctx(1.7, 0.35, 512);
    const double r_max = 6.0;
    const CovTable table(ctx, r_max, 256, 20);
    const double scale = table.at_zero();
    ctedge::CounterRng rng(9);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        double r = r_max * rng.uniform(0, i);
        double th = 2.0 * kPi * rng.uniform(1, i);
        Vec2 x = {r * std::cos(th), r * std::sin(th)};
        worst = std::max(worst, std::abs(table(x) - cov_C(ctx, x)));
    }
    CHECK(worst <= 1e-6 * scale);
    CHECK_THROWS_AS(table({r_max + 0.5, 0.0}), ctedge::NumericError);
}

TEST_CASE("rotation reduction agrees with 4d monte carlo quadrature") {
    const double rho = 3.0;
    for (bool constant : {true, false}) {
        const CovContext ctx = constant ? constant_ctx(std::sqrt(3.0), 512)
                                        : angular_ctx(1.7, 0.35, 512);
        const ctedge::SymMat2 m = ctedge::cov_matrix(ctx, rho);
        const CovTable table(ctx, 2.0 * rho, 64, 20);

        // Chat_ij = int int y_i y'_j C(y - y') over two independent uniform
        // draws on the disk, scaled by the squared disk area.
        const std::size_t n_pairs = 4000000;
        ctedge::CounterRng rng(2024);
        double s11 = 0.0, s12 = 0.0, s22 = 0.0;
        for (std::size_t i = 0; i < n_pairs; ++i) {
            double r1 = rho * std::sqrt(rng.uniform(0, i));
            double a1 = 2.0 * kPi * rng.uniform(1, i);
            double r2 = rho * std::sqrt(rng.uniform(2, i));
            double a2 = 2.0 * kPi * rng.uniform(3, i);
            Vec2 y1 = {r1 * std::cos(a1), r1 * std::sin(a1)};
            Vec2 y2 = {r2 * std::cos(a2), r2 * std::sin(a2)};
            double c = table(y1 - y2);
            s11 += y1.x * y2.x * c;
            s12 += y1.x * y2.y * c;
            s22 += y1.y * y2.y * c;
        }
        const double area = kPi * rho * rho;
        const double scale = area * area / static_cast<double>(n_pairs);
        CHECK(s11 * scale == doctest::Approx(m.a).epsilon(0.01));
        CHECK(s22 * scale == doctest::Approx(m.c).epsilon(0.01));
        CHECK(std::abs(s12 * scale - m.b) <= 0.01 * m.a);
    }
}

TEST_CASE("edge vector direction and magnitude") {
    const Kernel& k = default_kernel();
    const Vec2 theta0 = ctedge::unit_vector(2.2);
    const ctedge::EdgeVector ev = ctedge::edge_vector(k, 3.0, -2.0, theta0);
    CHECK(ev.magnitude_coeff > 0.0);
    // h is exactly coeff * delta_f * theta0.
    CHECK(ev.h.x == doctest::Approx(-2.0 * ev.magnitude_coeff * theta0.x).epsilon(1e-15));
    CHECK(ev.h.y == doctest::Approx(-2.0 * ev.magnitude_coeff * theta0.y).epsilon(1e-15));
    CHECK_THROWS_AS(ctedge::edge_vector(k, 0.0, 1.0, theta0), ctedge::ConfigError);
    CHECK_THROWS_AS(ctedge::edge_vector(k, 3.0, 1.0, {0.0, 0.0}), ctedge::ConfigError);
}

TEST_CASE("edge coefficient matches adaptive quadrature") {
    const Kernel& k = default_kernel();
    const double rho = 3.0;
    const double coeff = ctedge::edge_vector(k, rho, 1.0, {1.0, 0.0}).magnitude_coeff;
    const double oracle = adaptive_integrate(
        [&](double t) { return 4.0 * t * std::sqrt(std::max(0.0, rho * rho - t * t)) * k.dtb(t); },
        0.0, rho, 1e-12);
    CHECK(coeff == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("edge coefficient approaches the large-window limit") {
    const Kernel& k = default_kernel();
    const double rho = 50.0;
    const double coeff = ctedge::edge_vector(k, rho, 1.0, {1.0, 0.0}).magnitude_coeff;
    CHECK(std::abs(coeff / (rho * rho * rho) - 2.0 / 3.0) < 0.02);
}

TEST_CASE("field draws reproduce the covariance") {
    const CovContext ctx = constant_ctx(std::sqrt(3.0), 256);
    const CovTable table(ctx, 4.0, 16, 20);
    const double c0 = table.at_zero();

    CHECK(ctedge::grf_sample(ctx, {}, 7).empty());

    // Seed and replicate reproducibility.
    const std::vector<Vec2> pts = {{0.0, 0.0}, {1.1, 0.7}};
    auto d1 = ctedge::grf_sample(ctx, pts, 7, 0, &table);
    auto d2 = ctedge::grf_sample(ctx, pts, 7, 0, &table);
    CHECK(d1 == d2);
    CHECK(ctedge::grf_sample(ctx, pts, 8, 0, &table) != d1);
    CHECK(ctedge::grf_sample(ctx, pts, 7, 1, &table) != d1);

    // Single-point variance.
    const std::size_t n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = ctedge::grf_sample(ctx, {{0.3, -0.2}}, 99, i, &table)[0];
        sum += v;
        sum_sq += v * v;
    }
    double var = sum_sq / n - (sum / n) * (sum / n);
    CHECK(var == doctest::Approx(c0).epsilon(0.02));

    // Two-point correlation at a moderate and a large separation.
    for (Vec2 second : {Vec2{1.1, 0.7}, Vec2{3.6, 0.9}}) {
        const std::vector<Vec2> pair = {{0.0, 0.0}, second};
        const double expected = table(second) / c0;
        const std::size_t m = 40000;
        double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            auto d = ctedge::grf_sample(ctx, pair, 123, i, &table);
            sa += d[0];
            sb += d[1];
            saa += d[0] * d[0];
            sbb += d[1] * d[1];
            sab += d[0] * d[1];
        }
        double ma = sa / m, mb = sb / m;
        double corr = (sab / m - ma * mb) /
                      std::sqrt((saa / m - ma * ma) * (sbb / m - mb * mb));
        CHECK(std::abs(corr - expected) <= 4.0 / std::sqrt(static_cast<double>(m)));
    }
}

// Prints the reference-configuration constants that downstream statistics
// depend on; asserts only sanity so the values are visible in test logs.
TEST_CASE("reference configuration diagnostics") {
    const double rho = 3.0;
    const double sigma_sq = 3.0;
    const Kernel& k = default_kernel();
    const CovContext ctx = constant_ctx(std::sqrt(sigma_sq));
    const double kappa = default_grid().kappa;
    const double pref = (kappa / (4.0 * kPi)) * (kappa / (4.0 * kPi));

    const double c0 = cov_C(ctx, {0.0, 0.0});
    const double nu2 = ctedge::nu_sq(ctx, rho);
    const double q = nu2 / (pref * sigma_sq * kPi);
    const double coeff = ctedge::edge_vector(k, rho, 1.0, {1.0, 0.0}).magnitude_coeff;
    const double g_lin = ctedge::gamma_sq(ctx, WeightFn::linear(), rho);
    const double g_sgn = ctedge::gamma_sq(ctx, WeightFn::sign(), rho);
    const double h_lin = 2.0 * ctedge::gl_integrate([&](double t) { return t * k.dtb(t); }, 0.0, rho, 128);
    const double h_sgn = 2.0 * ctedge::gl_integrate([&](double t) { return k.dtb(t); }, 0.0, rho, 128);
    const double mu = coeff * coeff / nu2;
    const double m_lin = h_lin / std::sqrt(g_lin);
    const double m_sgn = h_sgn / std::sqrt(g_sgn);

    std::printf("diagnostics: C(0)=%.6f nu2=%.6f Q=%.6f coeff=%.6f\n", c0, nu2, q, coeff);
    std::printf("diagnostics: gamma2_lin=%.6f gamma2_sgn=%.6f H_lin=%.6f H_sgn=%.6f\n",
                g_lin, g_sgn, h_lin, h_sgn);
    std::printf("diagnostics: mu=%.6f sqrt(mu)=%.6f m_lin=%.6f m_sgn=%.6f\n", mu,
                std::sqrt(mu), m_lin, m_sgn);
    std::printf("diagnostics: ratios z2d/m_lin=%.6f m_sgn/m_lin=%.6f\n",
                std::sqrt(mu) / m_lin, m_sgn / m_lin);

    CHECK(c0 > 0.0);
    CHECK(nu2 > 0.0);
    CHECK(q > 0.0);
    CHECK(coeff > 0.0);
    CHECK(g_lin > 0.0);
    CHECK(g_sgn > 0.0);
}
