#pragma once

#include <vector>

#include "ctedge/kernel.hpp"
#include "ctedge/linalg.hpp"
#include "ctedge/reconstructor.hpp"
#include "ctedge/vec2.hpp"

namespace ctedge {

// Outcome of a single hypothesis test.
struct TestResult {
    double statistic = 0.0;
    double threshold = 0.0;
    bool reject = false;
    double p_value = 1.0;
    double alpha = 0.0;
};

// Confidence region {h : (h - center)' shape^{-1} (h - center) <= radius_sq}.
struct Ellipse {
    Vec2 center;
    SymMat2 shape;
    double radius_sq = 0.0;

    bool contains(Vec2 h) const;
};

// One-dimensional edge-detection weight along the probe segment.
enum class Weight1d { sign, linear };

// Standard normal CDF.
double normal_cdf(double x);

// Quantile of the chi-squared distribution with one degree of freedom:
// the x solving erf(sqrt(x/2)) = p.
double chi2_quantile_1(double p);

// CDF of the noncentral chi-squared distribution with two degrees of
// freedom and noncentrality mu, via the Poisson mixture series with a
// tail bound below 1e-12. Saturated tails (|sqrt(x) - sqrt(mu)| > 9)
// return 0 or 1 outright; otherwise arguments must stay below about
// 1400 because the series weights are evaluated in linear space.
double noncentral_chi2_cdf(double x, double mu);

// exp(-z) * I0(z) for z >= 0: series for small z, asymptotic expansion
// beyond 20; bounded by 1, so safe from overflow at any argument.
double bessel_i0_scaled(double z);

// Weighted integral of the patch along the segment {t*theta0 : |t| <= rho}
// by the midpoint rule at the patch resolution, with bilinear interpolation
// of the segment values. u(t) = sgn(t) or t on [-rho, rho].
double f_u_1d(const LocalPatch& patch, Vec2 theta0, Weight1d kind, double rho);

// Exact edge response of the weighted segment integral when the patch
// follows the smoothed-edge model: delta_f * integral of u(t) f_T(t).
double h_u_1d(const Kernel& kernel, Weight1d kind, double rho, double delta_f);

// Size-alpha test of "no edge" from the scalar statistic and its
// standard deviation gamma: Z = (f_u/gamma)^2 against the chi^2_1 quantile.
TestResult test_1d(double f_u, double gamma, double alpha);

// Exact type-II error probability of test_1d at edge response h_u:
// the probability that |N(|h_u|/gamma, 1)| stays below the critical radius.
double beta_1d(double h_u, double gamma, double alpha);

// Vector statistic F = integral over the disk B_rho of y * patch(y),
// midpoint rule over patch cells whose centers lie in the disk.
Vec2 f_2d(const LocalPatch& patch, double rho);

// Size-alpha test of "no edge" from the vector statistic and its
// covariance: Z = F' C^{-1} F against -2 ln(alpha); p-value exp(-Z/2).
TestResult test_2d(Vec2 f, const SymMat2& c, double alpha);

// Power of test_2d at alternative mean h: 1 - CDF of the noncentral
// chi^2_2 with mu = h' C^{-1} h at the threshold.
double power_2d(Vec2 h, const SymMat2& c, double alpha);

// Same power for isotropic covariance nu^2 I, via the radial series.
double power_2d_iso(Vec2 h, double nu, double alpha);

// Confidence ellipse for the true edge vector at level 1 - alpha,
// centered at the observed statistic.
Ellipse confidence_region(Vec2 f, const SymMat2& c, double alpha);

// Density of the direction F/|F| for F ~ N(h, nu^2 I), evaluated at
// absolute angle theta; closed Gaussian-projection form.
double direction_pdf(double theta, Vec2 h, double nu);

// Probability that the direction lies within +-omega of the direction
// of h, for omega in [0, pi].
double direction_coverage(double omega, Vec2 h, double nu);

// Density of the magnitude |F| for F ~ N(h, nu^2 I): the Rice density.
double magnitude_pdf(double t, Vec2 h, double nu);

// Probability that |F| lies within +-r of |h|; requires r < |h|.
double magnitude_coverage(double r, Vec2 h, double nu);

// Tabulated polar density for reporting and plotting.
struct PolarPdf {
    enum class Kind { direction, magnitude };
    Kind kind = Kind::direction;
    double h_mag = 0.0;
    double nu = 0.0;
    std::vector<double> grid;
    std::vector<double> values;
};

// Direction density on n equispaced angles spanning [-pi, pi].
PolarPdf tabulate_direction_pdf(Vec2 h, double nu, int n = 721);

// Magnitude density on n equispaced points spanning [0, |h| + 8 nu].
PolarPdf tabulate_magnitude_pdf(Vec2 h, double nu, int n = 513);

} // namespace ctedge
