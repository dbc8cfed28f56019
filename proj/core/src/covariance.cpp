#include "ctedge/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "ctedge/errors.hpp"
#include "ctedge/parallel.hpp"
#include "ctedge/quadrature.hpp"
#include "ctedge/rng.hpp"

namespace ctedge {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Keeps field draws on streams that can never collide with sinogram noise
// draws, whose stream index is the (small) replicate number.
constexpr std::uint64_t kGrfStreamBase = 0x4752460000000000ULL;

void check_context(const CovContext& ctx) {
    if (ctx.n_alpha < 256)
        throw ConfigError("covariance quadrature needs at least 256 angular nodes");
    if (!ctx.sigma)
        throw ConfigError("covariance context needs a noise level function");
    if (!(ctx.kappa > 0.0))
        throw ConfigError("covariance context needs a positive kappa");
    // Spot-check the half-turn parity sigma(alpha, p) = sigma(alpha + pi, -p).
    const double alphas[] = {0.3, 1.1, 2.0, 4.4};
    const double ps[] = {0.0, 0.2, -0.7};
    for (double a : alphas) {
        for (double p : ps) {
            double lhs = ctx.sigma(a, p);
            double rhs = ctx.sigma(a + kPi, -p);
            if (std::abs(lhs - rhs) > 1e-9 * (1.0 + std::abs(lhs)))
                throw ConfigError("noise level violates half-turn parity");
        }
    }
}

double prefactor(const CovContext& ctx) {
    double r = ctx.kappa / (4.0 * kPi);
    return r * r;
}

// Q(kernel, rho) = int int t s w1(t) w1(s) psi(t - s) dt ds with
// w1(t) = 2 sqrt(rho^2 - t^2). The substitution t = rho sin(u) removes the
// square-root endpoint behavior, leaving a piecewise-smooth integrand that
// Gauss-Legendre resolves to full precision.
double disk_moment_q(const Kernel& kernel, double rho) {
    static std::map<std::pair<std::string, double>, double> cache;
    static std::mutex mutex;
    const auto key = std::make_pair(kernel.name(), rho);
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }

    const int n = 192;
    const GaussLegendre& gl = gauss_legendre(n);
    std::vector<double> su(n), w(n);
    for (int i = 0; i < n; ++i) {
        double u = 0.5 * kPi * gl.nodes[i];
        double cu = std::cos(u);
        su[i] = std::sin(u);
        w[i] = 0.5 * kPi * gl.weights[i] * su[i] * cu * cu;
    }
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j)
            row += w[j] * kernel.autocorr_dphi(rho * (su[i] - su[j]));
        q += w[i] * row;
    }
    q *= 4.0 * std::pow(rho, 6);

    std::lock_guard<std::mutex> lock(mutex);
    cache.emplace(key, q);
    return q;
}

// magnitude_coeff(kernel, rho) = 4 int_0^rho t sqrt(rho^2 - t^2) f_T(t) dt,
// with the same sine substitution.
double magnitude_coeff(const Kernel& kernel, double rho) {
    static std::map<std::pair<std::string, double>, double> cache;
    static std::mutex mutex;
    const auto key = std::make_pair(kernel.name(), rho);
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }

    double coeff = 4.0 * std::pow(rho, 3) *
                   gl_integrate(
                       [&](double u) {
                           double cu = std::cos(u);
                           return std::sin(u) * cu * cu * kernel.dtb(rho * std::sin(u));
                       },
                       0.0, 0.5 * kPi, 256);

    std::lock_guard<std::mutex> lock(mutex);
    cache.emplace(key, coeff);
    return coeff;
}

}  // namespace

WeightFn WeightFn::linear() {
    WeightFn u;
    u.f = [](double t) { return t; };
    return u;
}

WeightFn WeightFn::sign() {
    WeightFn u;
    u.f = [](double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); };
    u.breakpoints = {0.0};
    return u;
}

CovContext::CovContext(const Kernel& k, std::function<double(double, double)> sigma_field,
                       double kappa_, Vec2 x0_, int n_alpha_)
    : x0(x0_), kappa(kappa_), sigma(std::move(sigma_field)), kernel(&k), n_alpha(n_alpha_) {
    check_context(*this);
}

CovContext::CovContext(const Kernel& k, const NoiseModel& noise, const SamplingGrid& grid,
                       Vec2 x0_, int n_alpha_)
    : x0(x0_), kappa(grid.kappa), kernel(&k), n_alpha(n_alpha_) {
    const double root_da = std::sqrt(grid.delta_alpha());
    sigma = [noise, grid, root_da](double alpha, double p) {
        return noise.std_dev(alpha, p, grid) / root_da;
    };
    check_context(*this);
}

double cov_C(const CovContext& ctx, Vec2 xcheck) {
    const int n = ctx.n_alpha;
    const double step = 2.0 * kPi / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double alpha = i * step;
        double c = std::cos(alpha), s = std::sin(alpha);
        double sig = ctx.sigma(alpha, c * ctx.x0.x + s * ctx.x0.y);
        sum += sig * sig * ctx.kernel->autocorr_dphi(c * xcheck.x + s * xcheck.y);
    }
    return prefactor(ctx) * sum * step;
}

double cov_C1(const CovContext& ctx, double t, double theta0) {
    return cov_C(ctx, {t * std::cos(theta0), t * std::sin(theta0)});
}

double gamma_sq(const CovContext& ctx, const WeightFn& u, double rho, double theta0) {
    if (!(rho > 0.0)) throw ConfigError("segment statistic needs a positive rho");
    if (!u.f) throw ConfigError("weight function is empty");

    // Chebyshev proxy for C1 on [0, 2 rho] (C1 is even), one panel per unit.
    const int n_panels = std::max(1, static_cast<int>(std::ceil(2.0 * rho - 1e-12)));
    const double width = 2.0 * rho / n_panels;
    std::vector<ChebyshevSeries> proxy;
    proxy.reserve(n_panels);
    for (int p = 0; p < n_panels; ++p)
        proxy.push_back(ChebyshevSeries::fit([&](double t) { return cov_C1(ctx, t, theta0); },
                                             p * width, (p + 1) * width, 20));
    auto c1 = [&](double t) {
        double r = std::min(std::abs(t), 2.0 * rho);
        int p = std::min(n_panels - 1, static_cast<int>(r / width));
        return proxy[p](r);
    };

    std::vector<double> edges = {-rho, rho};
    for (double b : u.breakpoints)
        if (b > -rho && b < rho) edges.push_back(b);
    std::sort(edges.begin(), edges.end());

    const int n = 128;
    const GaussLegendre& gl = gauss_legendre(n);
    double total = 0.0;
    for (std::size_t a = 0; a + 1 < edges.size(); ++a) {
        double mid1 = 0.5 * (edges[a] + edges[a + 1]);
        double half1 = 0.5 * (edges[a + 1] - edges[a]);
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            double mid2 = 0.5 * (edges[b] + edges[b + 1]);
            double half2 = 0.5 * (edges[b + 1] - edges[b]);
            double block = 0.0;
            for (int i = 0; i < n; ++i) {
                double t1 = mid1 + half1 * gl.nodes[i];
                double u1 = u.f(t1);
                if (u1 == 0.0) continue;
                double row = 0.0;
                for (int j = 0; j < n; ++j) {
                    double t2 = mid2 + half2 * gl.nodes[j];
                    row += gl.weights[j] * u.f(t2) * c1(t1 - t2);
                }
                block += gl.weights[i] * u1 * row;
            }
            total += block * half1 * half2;
        }
    }
    return total;
}

SymMat2 cov_matrix(const CovContext& ctx, double rho) {
    if (!(rho > 0.0)) throw ConfigError("disk statistic needs a positive rho");
    const double q = disk_moment_q(*ctx.kernel, rho);

    const int n = ctx.n_alpha;
    const double step = 2.0 * kPi / n;
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    for (int i = 0; i < n; ++i) {
        double alpha = i * step;
        double c = std::cos(alpha), s = std::sin(alpha);
        double sig = ctx.sigma(alpha, c * ctx.x0.x + s * ctx.x0.y);
        double s2 = sig * sig;
        s11 += s2 * c * c;
        s12 += s2 * c * s;
        s22 += s2 * s * s;
    }
    double pref = prefactor(ctx) * q * step;
    return SymMat2{pref * s11, pref * s12, pref * s22};
}

double nu_sq(const CovContext& ctx, double rho) { return cov_matrix(ctx, rho).a; }

EdgeVector edge_vector(const Kernel& kernel, double rho, double delta_f, Vec2 theta0) {
    if (!(rho > 0.0)) throw ConfigError("edge vector needs a positive rho");
    if (theta0.norm() == 0.0) throw ConfigError("edge vector needs a nonzero direction");
    EdgeVector ev;
    ev.magnitude_coeff = magnitude_coeff(kernel, rho);
    ev.h = (ev.magnitude_coeff * delta_f) * unit_vector(theta0.angle());
    return ev;
}

CovTable::CovTable(const CovContext& ctx, double r_max, int n_theta, int cheb_terms) {
    if (!(r_max > 0.0)) throw ConfigError("covariance table needs a positive range");
    if (n_theta < 4) throw ConfigError("covariance table needs at least 4 angles");
    r_max_ = r_max;
    n_theta_ = n_theta;
    n_panels_ = std::max(1, static_cast<int>(std::ceil(r_max / 0.5 - 1e-12)));
    panel_width_ = r_max / n_panels_;
    c0_ = cov_C(ctx, {0.0, 0.0});
    panels_.resize(static_cast<std::size_t>(n_theta_) * n_panels_);

    parallel_for(n_theta_, [&](int i) {
        const double theta = kPi * i / n_theta_;
        const Vec2 dir = unit_vector(theta);
        for (int p = 0; p < n_panels_; ++p) {
            panels_[static_cast<std::size_t>(i) * n_panels_ + p] = ChebyshevSeries::fit(
                [&](double r) { return cov_C(ctx, r * dir); }, p * panel_width_,
                (p + 1) * panel_width_, cheb_terms);
        }
    });
}

double CovTable::radial(int theta_idx, double r) const {
    int p = std::min(n_panels_ - 1, static_cast<int>(r / panel_width_));
    return panels_[static_cast<std::size_t>(theta_idx) * n_panels_ + p](r);
}

double CovTable::operator()(Vec2 xcheck) const {
    double r = xcheck.norm();
    if (r > r_max_ * (1.0 + 1e-12) + 1e-12)
        throw NumericError("separation exceeds the covariance table range");
    r = std::min(r, r_max_);

    double theta = std::atan2(xcheck.y, xcheck.x);
    if (theta < 0.0) theta += kPi;
    if (theta >= kPi) theta -= kPi;
    double s = theta * n_theta_ / kPi;
    int i1 = static_cast<int>(s);
    if (i1 >= n_theta_) i1 = n_theta_ - 1;
    double frac = s - i1;
    auto row = [&](int i) { return radial(((i % n_theta_) + n_theta_) % n_theta_, r); };
    double p0 = row(i1 - 1), p1 = row(i1), p2 = row(i1 + 1), p3 = row(i1 + 2);
    // Catmull-Rom in the angle (period pi).
    double a0 = 2.0 * p1;
    double a1 = p2 - p0;
    double a2 = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    double a3 = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    return 0.5 * (a0 + frac * (a1 + frac * (a2 + frac * a3)));
}

std::vector<double> grf_sample(const CovContext& ctx, const std::vector<Vec2>& points,
                               std::uint64_t seed, std::uint64_t replicate,
                               const CovTable* table) {
    const std::size_t n = points.size();
    if (n == 0) return {};

    auto cval = [&](Vec2 d) { return table ? (*table)(d) : cov_C(ctx, d); };
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double v = cval(points[i] - points[j]);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    const double jitter = 1e-10 * (table ? table->at_zero() : cov_C(ctx, {0.0, 0.0}));
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] += jitter;
    cholesky_lower(m, n);

    CounterRng rng(seed);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i)
        z[i] = rng.normal(kGrfStreamBase + replicate, i);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) acc += m[i * n + j] * z[j];
        out[i] = acc;
    }
    return out;
}

}  // namespace ctedge
