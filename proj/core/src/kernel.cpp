#include "ctedge/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ctedge/errors.hpp"

namespace ctedge {

namespace {

constexpr double kLogClamp = 1e-30;

PiecewisePoly convolved_boxes(int count) {
    PiecewisePoly b = PiecewisePoly::box(-0.5, 0.5);
    for (int i = 1; i < count; ++i)
        b = b.convolve(PiecewisePoly::box(-0.5, 0.5));
    return b;
}

} // namespace

Kernel Kernel::bspline(int degree, double hilbert_truncation) {
    if (degree < 1 || degree > 6)
        throw ConfigError("Kernel::bspline: degree must be in [1, 6]");
    return Kernel("bspline" + std::to_string(degree),
                  convolved_boxes(degree + 1), degree - 1, hilbert_truncation);
}

Kernel Kernel::trapezoid(double hilbert_truncation) {
    PiecewisePoly phi =
        PiecewisePoly::box(-0.5, 0.5).convolve(PiecewisePoly::box(-1.0, 1.0, 0.5));
    return Kernel("trapezoid", std::move(phi), 0, hilbert_truncation);
}

Kernel Kernel::from_name(const std::string& name, double hilbert_truncation) {
    if (name == "bspline4") return bspline(4, hilbert_truncation);
    if (name == "bspline3") return bspline(3, hilbert_truncation);
    if (name == "trapezoid") return trapezoid(hilbert_truncation);
    throw ConfigError("unknown kernel '" + name +
                      "' (expected bspline4, bspline3, or trapezoid)");
}

Kernel::Kernel(std::string name, PiecewisePoly phi, int smoothness_order,
               double hilbert_truncation)
    : name_(std::move(name)),
      phi_(std::move(phi)),
      smoothness_order_(smoothness_order),
      t_hard_(hilbert_truncation) {
    support_radius_ = phi_.support_hi();
    if (!(t_hard_ >= support_radius_))
        throw ConfigError("hilbert_truncation must be >= the kernel support");
    dphi_ = phi_.derivative();
    phi_cdf_ = phi_.antiderivative();
    autocorr_ = dphi_.cross_correlate(dphi_);
    second_moment_ = phi_.moment(2);

    // Residual polynomial of the per-piece principal-value integral:
    // p.v. int_{-w}^{w} u^k / (v - u) du
    //   = v^k (ln|v + w| - ln|v - w|) - sum_{j<k} v^j int_{-w}^{w} u^{k-1-j} du.
    hilbert_rho_.resize(dphi_.piece_count());
    for (int i = 0; i < dphi_.piece_count(); ++i) {
        const auto& c = dphi_.piece_coeffs(i);
        const double w = dphi_.piece_halfwidth(i);
        std::vector<double> rho(c.size(), 0.0);
        for (std::size_t k = 1; k < c.size(); ++k) {
            for (std::size_t j = 0; j < k; ++j) {
                const int e = static_cast<int>(k - 1 - j);
                if (e % 2 == 0)
                    rho[j] += c[k] * 2.0 * std::pow(w, e + 1) / (e + 1);
            }
        }
        hilbert_rho_[i] = std::move(rho);
    }

    // Chebyshev proxies of the closed form on geometric intervals from the
    // support edge to the asymptotic handoff; evaluation stays smooth and
    // cheap in the mid-range the reconstruction loops hit most.
    const double proxy_end = std::min(t_asym_, t_hard_);
    proxy_edges_.push_back(support_radius_);
    double edge = support_radius_;
    const double ratio = 1.35;
    while (edge * ratio < proxy_end) {
        edge *= ratio;
        proxy_edges_.push_back(edge);
    }
    proxy_edges_.push_back(proxy_end);
    for (std::size_t i = 0; i + 1 < proxy_edges_.size(); ++i) {
        hilbert_proxy_.push_back(ChebyshevSeries::fit(
            [this](double x) { return hilbert_dphi_closed(x); },
            proxy_edges_[i], proxy_edges_[i + 1], 26));
    }
}

double Kernel::hilbert_dphi_closed(double t) const {
    const auto& knots = dphi_.knots();
    const int n = dphi_.piece_count();
    std::array<double, 16> logs{};
    for (int i = 0; i <= n; ++i)
        logs[i] = std::log(std::max(std::abs(t - knots[i]), kLogClamp));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = t - dphi_.piece_mid(i);
        const double q = dphi_.eval_piece(i, v);
        const auto& rho = hilbert_rho_[i];
        double r = 0.0;
        for (std::size_t k = rho.size(); k-- > 0;) r = r * v + rho[k];
        sum += q * (logs[i] - logs[i + 1]) - r;
    }
    return sum / M_PI;
}

double Kernel::hilbert_dphi(double t) const {
    const double a = std::abs(t);
    if (a > t_hard_) return 0.0;
    if (a <= support_radius_) return hilbert_dphi_closed(t);
    if (a <= proxy_edges_.back()) {
        for (std::size_t i = 0; i + 1 < proxy_edges_.size(); ++i)
            if (a <= proxy_edges_[i + 1]) return hilbert_proxy_[i](a);
    }
    const double t2 = a * a;
    return -(1.0 / M_PI) * (1.0 + 3.0 * second_moment_ / t2) / t2;
}

double Kernel::dtb(double t) const {
    return phi_cdf_.evaluate_clamped(t) - 0.5;
}

} // namespace ctedge
