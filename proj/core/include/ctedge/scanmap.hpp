#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctedge/covariance.hpp"
#include "ctedge/reconstructor.hpp"
#include "ctedge/vec2.hpp"

namespace ctedge {

// Mask rule for the scanned field. Exactly one branch is active: a positive
// relative_fraction masks centers with mag >= fraction * max(mag); otherwise
// centers whose pointwise p-value falls below 1 - null_quantile are masked
// (for isotropic noise this is the Rayleigh threshold
// sqrt(-2 nu^2 ln(1 - q)) on |F|).
struct ThresholdPolicy {
    double null_quantile = 0.99;
    double relative_fraction = 0.0;
};

// Sliding-window protocol: the disk statistic of radius rho (edge-scale
// units, i.e. physical radius rho * epsilon) is evaluated on a sub-lattice
// of the image grid, every `stride` image cells. stride = 0 selects the
// half-window default rho / 2 in edge-scale units. step_fraction is the
// recommended image step as a fraction of epsilon when building the input
// image; scan itself only requires image.step <= epsilon / 4.
struct ScanConfig {
    double rho = 3.0;
    double epsilon = 0.007;
    int stride = 0;
    double step_fraction = 0.125;
    ThresholdPolicy policy;
};

struct QuiverArrow {
    Vec2 center;
    Vec2 dir; // unit vector F / |F|
    double mag = 0.0;
    double p_value = 1.0;
};

// Field of disk statistics over the window centers (row-major, ncy rows of
// ncx centers). theta is the direction angle folded to [0, pi) with the
// half-turn recorded in sign, so f = sign * mag * (cos theta, sin theta);
// sign is 0 where mag = 0 and theta is meaningless there. p_value is the
// pointwise no-edge p-value (no multiplicity correction across centers).
struct EdgeMap {
    int ncx = 0, ncy = 0;
    int stride = 0;          // image cells between centers
    double center_step = 0.0; // physical distance between centers
    std::vector<Vec2> centers;
    std::vector<Vec2> f;
    std::vector<double> mag;
    std::vector<double> theta;
    std::vector<std::int8_t> sign;
    std::vector<double> nu_sq;
    std::vector<double> p_value;
    std::vector<std::uint8_t> mask;
    std::vector<QuiverArrow> quiver;

    std::size_t index(int cx, int cy) const {
        return static_cast<std::size_t>(cy) * ncx + cx;
    }
};

// Slides the window across the image: for every center the disk statistic
// F is the midpoint quadrature of ycheck times the image over the window
// (the image must sample the reconstruction with step <= epsilon / 4, so
// the quadrature nodes land exactly on grid points). Centers are placed
// symmetrically inside the admissible span. The per-center dispersion comes
// from the covariance context: one shared nu^2 when sigma is constant, a
// per-center covariance matrix otherwise (then the p-value uses the full
// quadratic form). The config's policy is applied before returning.
// Throws ConfigError when the image step is too coarse, the stride is
// negative, or no window fits inside the image.
EdgeMap scan(const ImageGrid& image, const ScanConfig& config, const CovContext& ctx);

// Re-thresholds an existing map in place: rebuilds mask and quiver from the
// given policy without touching the field values.
void extract_edges(EdgeMap& map, const ThresholdPolicy& policy);

// Symmetric Hausdorff distance between two nonempty point sets.
double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

// n equally spaced points on the circle, for localization scoring.
std::vector<Vec2> circle_points(Vec2 center, double radius, int n);

// CSV exports: magnitude ("x,y,mag"), direction ("x,y,theta,sign"), and
// quiver ("x,y,ux,uy,mag,p_value", masked centers only). The PGM export
// min-max scales the magnitude field over the centers lattice.
void write_edgemap_mag_csv(const EdgeMap& map, const std::string& path);
void write_edgemap_theta_csv(const EdgeMap& map, const std::string& path);
void write_quiver_csv(const EdgeMap& map, const std::string& path);
void write_edgemap_mag_pgm(const EdgeMap& map, const std::string& path);

} // namespace ctedge
