#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ctedge/chebyshev.hpp"
#include "ctedge/piecewise_poly.hpp"

namespace ctedge {

// Interpolation kernel: an even, compactly supported, order-1 exact
// piecewise polynomial phi together with the derived objects the
// reconstruction and covariance layers need -- phi', the principal-value
// Hilbert transform H(phi'), the smoothed-edge profile (running integral of
// phi minus 1/2), and the autocorrelation phi' star phi'.
//
// All derived objects are computed symbolically from the pieces at
// construction; evaluation is pure and thread-safe.
class Kernel {
public:
    // Centered cardinal B-spline of the given degree (2, 3, or 4).
    static Kernel bspline(int degree, double hilbert_truncation = 64.0);

    // Box blurred with a width-2 box: flat top 1/2 on [-1/2, 1/2],
    // linear ramps to zero at |t| = 3/2. Order-1 exact but only C^0.
    static Kernel trapezoid(double hilbert_truncation = 64.0);

    // "bspline4" | "bspline3" | "trapezoid"; throws ConfigError otherwise.
    static Kernel from_name(const std::string& name,
                            double hilbert_truncation = 64.0);

    const std::string& name() const { return name_; }
    double support_radius() const { return support_radius_; }

    // Largest M such that the (M+1)-th derivative is bounded.
    int smoothness_order() const { return smoothness_order_; }

    // Radius beyond which hilbert_dphi returns 0.
    double hilbert_truncation() const { return t_hard_; }

    double phi(double t) const { return phi_(t); }
    double dphi(double t) const { return dphi_(t); }

    // H(phi')(t) with Hf(t) = (1/pi) p.v. int f(s) / (t - s) ds.
    // Exact per-piece closed form inside the support, a Chebyshev proxy of
    // the closed form out to the asymptotic radius, the two-term tail
    // -(1/pi)(1/t^2 + 3 m2 / t^4) beyond it, and 0 past the truncation.
    double hilbert_dphi(double t) const;

    // Closed form at any radius, no truncation; reference route for tests.
    double hilbert_dphi_closed(double t) const;

    // f_T(t) = int_{-inf}^{t} phi - 1/2; equals -1/2 and +1/2 beyond the
    // support and rises monotonically across it.
    double dtb(double t) const;

    // (phi' star phi')(t); zero for |t| >= 2 * support_radius.
    double autocorr_dphi(double t) const {
        if (std::abs(t) >= 2.0 * support_radius_) return 0.0;
        return autocorr_(t);
    }

    // int (phi')^2 = autocorr_dphi(0).
    double dphi_sq_integral() const { return autocorr_(0.0); }

    // int t^2 phi(t) dt.
    double second_moment() const { return second_moment_; }

    const PiecewisePoly& phi_poly() const { return phi_; }
    const PiecewisePoly& dphi_poly() const { return dphi_; }
    const PiecewisePoly& autocorr_poly() const { return autocorr_; }

private:
    Kernel(std::string name, PiecewisePoly phi, int smoothness_order,
           double hilbert_truncation);

    std::string name_;
    PiecewisePoly phi_;
    PiecewisePoly dphi_;
    PiecewisePoly phi_cdf_;
    PiecewisePoly autocorr_;
    double support_radius_ = 0.0;
    int smoothness_order_ = 0;
    double second_moment_ = 0.0;
    double t_hard_ = 64.0;
    double t_asym_ = 40.0;

    // Closed-form Hilbert data: per-piece polynomial q_i (= phi' piece,
    // extrapolated) and the residual polynomial rho_i; shared per-knot logs
    // make the singular terms cancel exactly at interior knots.
    std::vector<std::vector<double>> hilbert_rho_;
    std::vector<ChebyshevSeries> hilbert_proxy_;
    std::vector<double> proxy_edges_;
};

} // namespace ctedge
