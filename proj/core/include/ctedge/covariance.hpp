#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctedge/chebyshev.hpp"
#include "ctedge/kernel.hpp"
#include "ctedge/linalg.hpp"
#include "ctedge/sampling.hpp"
#include "ctedge/vec2.hpp"

namespace ctedge {

// Weight function for 1D segment statistics: a bounded function on [-rho, rho]
// together with its interior breakpoints (quadrature panels are split there).
struct WeightFn {
    std::function<double(double)> f;
    std::vector<double> breakpoints;

    // u(t) = t
    static WeightFn linear();
    // u(t) = sgn(t)
    static WeightFn sign();
};

// Theoretical edge vector: h = magnitude_coeff * delta_f * theta0.
struct EdgeVector {
    Vec2 h;
    double magnitude_coeff = 0.0;
};

// Everything needed to evaluate the limiting random-field covariance at a
// fixed scene point x0: the kernel, the angular sampling density kappa, and
// the noise level sigma(alpha, p) expressed in field units (the per-sample
// standard deviation divided by sqrt(delta_alpha), so that any finite-sample
// noise convention maps onto the same limit).
struct CovContext {
    Vec2 x0;
    double kappa = 0.0;
    std::function<double(double, double)> sigma;
    const Kernel* kernel = nullptr;
    int n_alpha = 2048;

    CovContext(const Kernel& k, std::function<double(double, double)> sigma_field,
               double kappa_, Vec2 x0_, int n_alpha_ = 2048);

    // Derives the field-unit sigma from a concrete noise model on a grid,
    // so covariance predictions match simulated noise under every convention
    // (scaled, raw_std, or custom vartheta).
    CovContext(const Kernel& k, const NoiseModel& noise, const SamplingGrid& grid,
               Vec2 x0_, int n_alpha_ = 2048);
};

// Covariance of the limiting field between two points separated by xcheck
// (local, edge-scale coordinates):
//   C(xcheck) = (kappa/4pi)^2 * integral_0^{2pi} sigma^2(alpha, a(alpha).x0)
//               * psi(a(alpha).xcheck) dalpha,
// with psi the autocorrelation of the kernel derivative, computed by the
// trapezoid rule on n_alpha nodes (spectrally accurate for periodic
// integrands).
double cov_C(const CovContext& ctx, Vec2 xcheck);

// One-dimensional restriction along the direction theta0:
//   C1(t) = C(t * (cos theta0, sin theta0)).
double cov_C1(const CovContext& ctx, double t, double theta0);

// Variance of the smoothed segment statistic:
//   gamma^2 = integral integral u(t1) u(t2) C1(t1 - t2) dt1 dt2
// over [-rho, rho]^2, by tensor Gauss-Legendre (128 nodes per dimension per
// smooth panel; panels split at the weight function's breakpoints).
double gamma_sq(const CovContext& ctx, const WeightFn& u, double rho,
                double theta0 = 0.0);

// Covariance matrix of the disk statistic F, via the rotation reduction
//   Chat = (kappa/4pi)^2 * integral sigma^2(alpha, a.x0) a a^T dalpha * Q,
//   Q = integral integral t s w1(t) w1(s) psi(t-s) dt ds,  w1(t) = 2 sqrt(rho^2 - t^2).
// Q depends only on (kernel, rho) and is memoized.
SymMat2 cov_matrix(const CovContext& ctx, double rho);

// Isotropic variance nu^2 = c11 of the covariance matrix. Meaningful as the
// common eigenvalue only when sigma is constant (then Chat = nu^2 * I).
double nu_sq(const CovContext& ctx, double rho);

// Deterministic edge response of the disk statistic:
//   magnitude_coeff = 4 * integral_0^rho t sqrt(rho^2 - t^2) f_T(t) dt,
//   h = magnitude_coeff * delta_f * theta0.
// theta0 must be nonzero; it is normalized to a unit vector.
EdgeVector edge_vector(const Kernel& kernel, double rho, double delta_f, Vec2 theta0);

// Fast interpolated evaluator for cov_C: radial Chebyshev panels crossed with
// periodic Catmull-Rom interpolation in the angle (period pi, since C is
// even). Valid for |xcheck| <= r_max.
class CovTable {
  public:
    CovTable(const CovContext& ctx, double r_max, int n_theta = 256, int cheb_terms = 20);

    double operator()(Vec2 xcheck) const;
    double r_max() const { return r_max_; }
    double at_zero() const { return c0_; }

  private:
    double radial(int theta_idx, double r) const;

    double r_max_ = 0.0;
    int n_theta_ = 0;
    int n_panels_ = 0;
    double panel_width_ = 0.0;
    double c0_ = 0.0;
    std::vector<ChebyshevSeries> panels_;  // n_theta * n_panels, row-major
};

// One draw of the zero-mean Gaussian field with covariance C(x_i - x_j) at the
// given points, via Cholesky factorization with a 1e-10 * C(0) diagonal
// jitter. Draws are a pure function of (seed, replicate) on a stream disjoint
// from sinogram noise streams. If a table is supplied it must cover the
// largest pairwise distance and is used in place of direct cov_C calls.
std::vector<double> grf_sample(const CovContext& ctx, const std::vector<Vec2>& points,
                               std::uint64_t seed, std::uint64_t replicate = 0,
                               const CovTable* table = nullptr);

}  // namespace ctedge
