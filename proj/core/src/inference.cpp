#include "ctedge/inference.hpp"

#include <algorithm>
#include <cmath>

#include "ctedge/errors.hpp"
#include "ctedge/quadrature.hpp"

namespace ctedge {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Inverse of the positive-definite covariance with an explicit
// degeneracy check: the matrix must be safely away from singular.
SymMat2 checked_inverse(const SymMat2& c) {
    double lo = 0.0, hi = 0.0;
    c.eigen(lo, hi);
    if (!(lo > 1e-12 * c.trace()) || !(c.det() > 1e-300))
        throw NumericError("covariance matrix is singular or indefinite");
    return c.inverse();
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw PreconditionError("alpha must lie in (0, 1)");
}

void check_nu(double nu) {
    if (!(nu > 0.0)) throw PreconditionError("nu must be positive");
}

double weight_value(Weight1d kind, double t) {
    if (kind == Weight1d::linear) return t;
    return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
}

// Bilinear interpolation of the patch at checked coordinates (x, y).
double patch_bilinear(const LocalPatch& patch, double x, double y) {
    const int half = patch.half();
    const double fx = x / patch.h + half;
    const double fy = y / patch.h + half;
    int ix = static_cast<int>(std::floor(fx));
    int iy = static_cast<int>(std::floor(fy));
    ix = std::clamp(ix, 0, patch.n - 2);
    iy = std::clamp(iy, 0, patch.n - 2);
    const double wx = fx - ix;
    const double wy = fy - iy;
    const double v00 = patch.at(ix, iy);
    const double v10 = patch.at(ix + 1, iy);
    const double v01 = patch.at(ix, iy + 1);
    const double v11 = patch.at(ix + 1, iy + 1);
    return (1.0 - wy) * ((1.0 - wx) * v00 + wx * v10) +
           wy * ((1.0 - wx) * v01 + wx * v11);
}

} // namespace

bool Ellipse::contains(Vec2 h) const {
    return checked_inverse(shape).quad_form(h - center) <= radius_sq;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double chi2_quantile_1(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw PreconditionError("quantile level must lie in (0, 1)");
    // Solve erfc(t) = 1 - p by Newton; stable because the residual is
    // evaluated through erfc rather than the saturating erf.
    const double q = 1.0 - p;
    double t = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double r = std::erfc(t) - q;
        if (std::abs(r) <= 1e-16 * q) break;
        const double step = r * 0.5 * std::sqrt(M_PI) * std::exp(t * t);
        t += std::clamp(step, -1.0, 1.0);
        if (t < 0.0) t = 1e-8;
    }
    return 2.0 * t * t;
}

double noncentral_chi2_cdf(double x, double mu) {
    if (!(x >= 0.0) || !(mu >= 0.0))
        throw PreconditionError("noncentral_chi2_cdf requires x >= 0 and mu >= 0");
    // The distribution is that of ||N(h, I2)||^2 with ||h||^2 = mu; the
    // norm concentrates within O(1) of sqrt(mu), so nine standard
    // deviations of slack decide the tail to far below the series bound.
    const double gap = std::sqrt(x) - std::sqrt(mu);
    if (gap > 9.0) return 1.0;
    if (gap < -9.0) return 0.0;
    if (x > 1400.0 || mu > 1400.0)
        throw NumericError("noncentral_chi2_cdf arguments too large for the series");
    // P(chi^2_{2+2k} <= x) = 1 - e^{-x/2} sum_{i<=k} (x/2)^i / i!,
    // mixed over Poisson(mu/2) weights; the CDF factors decrease in k,
    // so the unassigned Poisson mass bounds the tail.
    double w = std::exp(-0.5 * mu);
    double term = std::exp(-0.5 * x);
    double partial = term;
    double pk = 1.0 - partial;
    double acc = 0.0;
    double wsum = 0.0;
    for (int k = 0; k < 200000; ++k) {
        if (k > 0) {
            w *= 0.5 * mu / k;
            term *= 0.5 * x / k;
            partial += term;
            pk = 1.0 - partial;
        }
        if (pk < 0.0) pk = 0.0;
        acc += w * pk;
        wsum += w;
        if ((1.0 - wsum) * pk < 1e-13) break;
    }
    return std::clamp(acc, 0.0, 1.0);
}

double bessel_i0_scaled(double z) {
    if (!(z >= 0.0)) throw PreconditionError("bessel_i0_scaled requires z >= 0");
    if (z <= 20.0) {
        double term = 1.0, sum = 1.0;
        const double q = 0.25 * z * z;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return std::exp(-z) * sum;
    }
    // Asymptotic expansion: I0(z) ~ e^z/sqrt(2 pi z) * (1 + sum a_k / z^k),
    // a_k = prod_{j<=k} (2j-1)^2 / (k! 8^k); seven terms give ~1e-10
    // relative accuracy at the switch point.
    double sum = 1.0, num = 1.0, fac = 1.0, pw = 1.0;
    for (int k = 1; k <= 6; ++k) {
        num *= (2.0 * k - 1.0) * (2.0 * k - 1.0);
        fac *= 8.0 * k;
        pw *= z;
        sum += num / (fac * pw);
    }
    return sum / std::sqrt(kTwoPi * z);
}

double f_u_1d(const LocalPatch& patch, Vec2 theta0, Weight1d kind, double rho) {
    if (!(rho > 0.0)) throw PreconditionError("rho must be positive");
    const double len = theta0.norm();
    if (!(len > 0.0)) throw PreconditionError("theta0 must be nonzero");
    theta0 = theta0 / len;
    const double extent = patch.half() * patch.h;
    const double reach = rho * std::max(std::abs(theta0.x), std::abs(theta0.y));
    if (reach > extent * (1.0 + 1e-12))
        throw PreconditionError("probe segment exits the patch");

    int m = static_cast<int>(std::lround(2.0 * rho / patch.h));
    if (m < 1) m = 1;
    const double step = 2.0 * rho / m;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double t = -rho + (i + 0.5) * step;
        acc += weight_value(kind, t) *
               patch_bilinear(patch, t * theta0.x, t * theta0.y);
    }
    return acc * step;
}

double h_u_1d(const Kernel& kernel, Weight1d kind, double rho, double delta_f) {
    if (!(rho > 0.0)) throw PreconditionError("rho must be positive");
    // u and f_T are both odd, so the integral is twice the [0, rho] part.
    const double s = kernel.support_radius();
    const double core = std::min(rho, s);
    const int panels = std::max(8, static_cast<int>(std::ceil(core / 0.25)));
    double acc = gl_integrate_panels(
        [&](double t) { return weight_value(kind, t) * kernel.dtb(t); }, 0.0, core,
        64, panels);
    if (rho > s) {
        // Beyond the support the smoothed edge is exactly 1/2.
        acc += (kind == Weight1d::linear) ? 0.25 * (rho * rho - s * s)
                                          : 0.5 * (rho - s);
    }
    return 2.0 * delta_f * acc;
}

TestResult test_1d(double f_u, double gamma, double alpha) {
    if (!(gamma > 0.0)) throw PreconditionError("gamma must be positive");
    check_alpha(alpha);
    TestResult r;
    r.alpha = alpha;
    const double z = (f_u / gamma) * (f_u / gamma);
    r.statistic = z;
    r.threshold = chi2_quantile_1(1.0 - alpha);
    r.reject = z > r.threshold;
    r.p_value = std::erfc(std::sqrt(0.5 * z));
    return r;
}

double beta_1d(double h_u, double gamma, double alpha) {
    if (!(gamma > 0.0)) throw PreconditionError("gamma must be positive");
    check_alpha(alpha);
    const double m = std::abs(h_u) / gamma;
    const double root = std::sqrt(chi2_quantile_1(1.0 - alpha));
    return normal_cdf(root - m) - normal_cdf(-root - m);
}

Vec2 f_2d(const LocalPatch& patch, double rho) {
    if (!(rho > 0.0)) throw PreconditionError("rho must be positive");
    const double extent = patch.half() * patch.h;
    if (rho > extent * (1.0 + 1e-12))
        throw PreconditionError("patch does not cover the disk");
    Vec2 acc{0.0, 0.0};
    for (const Vec2& node : disk_quadrature_nodes(rho, patch.h)) {
        const int ix = static_cast<int>(std::lround(node.x / patch.h)) + patch.half();
        const int iy = static_cast<int>(std::lround(node.y / patch.h)) + patch.half();
        acc = acc + patch.at(ix, iy) * node;
    }
    return (patch.h * patch.h) * acc;
}

TestResult test_2d(Vec2 f, const SymMat2& c, double alpha) {
    check_alpha(alpha);
    TestResult r;
    r.alpha = alpha;
    r.statistic = checked_inverse(c).quad_form(f);
    r.threshold = -2.0 * std::log(alpha);
    r.reject = r.statistic > r.threshold;
    r.p_value = std::exp(-0.5 * r.statistic);
    return r;
}

double power_2d(Vec2 h, const SymMat2& c, double alpha) {
    check_alpha(alpha);
    const double mu = checked_inverse(c).quad_form(h);
    return 1.0 - noncentral_chi2_cdf(-2.0 * std::log(alpha), mu);
}

double power_2d_iso(Vec2 h, double nu, double alpha) {
    check_nu(nu);
    check_alpha(alpha);
    const double kappa = h.norm() / nu;
    return 1.0 - noncentral_chi2_cdf(-2.0 * std::log(alpha), kappa * kappa);
}

Ellipse confidence_region(Vec2 f, const SymMat2& c, double alpha) {
    check_alpha(alpha);
    checked_inverse(c);
    return Ellipse{f, c, -2.0 * std::log(alpha)};
}

double direction_pdf(double theta, Vec2 h, double nu) {
    check_nu(nu);
    const double kappa = h.norm() / nu;
    const double delta = theta - h.angle();
    const double a = kappa * std::cos(delta);
    const double s = kappa * std::sin(delta);
    return (std::exp(-0.5 * kappa * kappa) +
            a * std::sqrt(kTwoPi) * normal_cdf(a) * std::exp(-0.5 * s * s)) /
           kTwoPi;
}

double direction_coverage(double omega, Vec2 h, double nu) {
    check_nu(nu);
    if (!(omega >= 0.0) || omega > M_PI * (1.0 + 1e-12))
        throw PreconditionError("omega must lie in [0, pi]");
    omega = std::min(omega, M_PI);
    if (omega == 0.0) return 0.0;
    const double theta0 = h.angle();
    // The density is symmetric about theta0 and has angular width ~1/kappa.
    const double kappa = h.norm() / nu;
    const int panels =
        std::min(200, std::max(8, static_cast<int>(std::ceil(2.0 * omega * (kappa + 1.0)))));
    return 2.0 * gl_integrate_panels(
                     [&](double d) { return direction_pdf(theta0 + d, h, nu); }, 0.0,
                     omega, 32, panels);
}

double magnitude_pdf(double t, Vec2 h, double nu) {
    check_nu(nu);
    if (t <= 0.0) return 0.0;
    const double t0 = h.norm();
    const double inv = 1.0 / (nu * nu);
    const double d = t - t0;
    return t * inv * std::exp(-0.5 * d * d * inv) * bessel_i0_scaled(t * t0 * inv);
}

double magnitude_coverage(double r, Vec2 h, double nu) {
    check_nu(nu);
    const double t0 = h.norm();
    if (!(r >= 0.0) || !(r < t0))
        throw PreconditionError("coverage radius must lie in [0, |h|)");
    if (r == 0.0) return 0.0;
    const int panels =
        std::min(200, std::max(8, static_cast<int>(std::ceil(4.0 * r / nu))));
    return gl_integrate_panels([&](double t) { return magnitude_pdf(t, h, nu); },
                               t0 - r, t0 + r, 32, panels);
}

PolarPdf tabulate_direction_pdf(Vec2 h, double nu, int n) {
    check_nu(nu);
    if (n < 2) throw PreconditionError("table needs at least two points");
    PolarPdf p;
    p.kind = PolarPdf::Kind::direction;
    p.h_mag = h.norm();
    p.nu = nu;
    p.grid.resize(n);
    p.values.resize(n);
    for (int i = 0; i < n; ++i) {
        const double theta = -M_PI + kTwoPi * i / (n - 1);
        p.grid[i] = theta;
        p.values[i] = direction_pdf(theta, h, nu);
    }
    return p;
}

PolarPdf tabulate_magnitude_pdf(Vec2 h, double nu, int n) {
    check_nu(nu);
    if (n < 2) throw PreconditionError("table needs at least two points");
    PolarPdf p;
    p.kind = PolarPdf::Kind::magnitude;
    p.h_mag = h.norm();
    p.nu = nu;
    p.grid.resize(n);
    p.values.resize(n);
    const double t_max = p.h_mag + 8.0 * nu;
    for (int i = 0; i < n; ++i) {
        const double t = t_max * i / (n - 1);
        p.grid[i] = t;
        p.values[i] = magnitude_pdf(t, h, nu);
    }
    return p;
}

} // namespace ctedge
