#pragma once

#include <string>
#include <vector>

#include "ctedge/kernel.hpp"
#include "ctedge/sampling.hpp"
#include "ctedge/vec2.hpp"

namespace ctedge {

// Reconstruction samples on a square lattice of edge-scale coordinates
// around x0: samples[iy * n + ix] is the value at x0 + epsilon * xcheck,
// xcheck = (coord(ix), coord(iy)), with the lattice symmetric about 0 and
// covering the sup-norm ball of radius rho.
struct LocalPatch {
    enum class Part { full, deterministic, noise_only };

    Vec2 x0;
    double epsilon = 0.0;
    double rho = 0.0;
    double h = 0.0;
    Part part = Part::full;
    int n = 0;
    std::vector<double> samples;

    int half() const { return (n - 1) / 2; }
    double coord(int idx) const { return (idx - half()) * h; }
    double at(int ix, int iy) const { return samples[static_cast<std::size_t>(iy) * n + ix]; }
};

struct BoundingBox {
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
};

// Macro-scale reconstruction on a regular grid: values[iy * nx + ix] at
// (x_min + ix * step, y_min + iy * step).
struct ImageGrid {
    double x_min = 0.0, y_min = 0.0, step = 0.0;
    int nx = 0, ny = 0;
    std::vector<double> values;

    double x(int ix) const { return x_min + ix * step; }
    double y(int iy) const { return y_min + iy * step; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
};

// Linear functionals expressing the disk statistic F directly in sinogram
// entries: F = (sum w1[cell] g[cell], sum w2[cell] g[cell]). Computing them
// once turns every Monte Carlo replicate into two sparse dot products.
struct InfluenceWeights {
    SamplingGrid grid;
    Vec2 x0;
    double rho = 0.0;
    double quadrature_step = 0.0;
    std::vector<double> w1, w2;

    Vec2 apply(const std::vector<double>& values) const;
    Vec2 apply(const Sinogram& sino) const;
};

// Fit of the smoothed-edge model value = c + delta_f * f_T(theta0 . xcheck)
// to a deterministic patch.
struct DtbFit {
    double c_fit = 0.0;
    double max_residual = 0.0;
};

// Filtered-backprojection value at x:
//   (dalpha / 4 pi eps) sum_k sum_j Hphi'((a_k . x - p_j) / eps) g[k][j],
// the j-sum restricted to arguments within the kernel's Hilbert truncation.
// Throws ConfigError when |x| >= P.
double fbp_value(const Sinogram& sino, const Kernel& kernel, Vec2 x);

// The same linear functional as a dense cell-indexed weight plane:
// fbp_value(sino, kernel, x) == dot(fbp_point_weights(grid, kernel, x), sino.values).
std::vector<double> fbp_point_weights(const SamplingGrid& grid, const Kernel& kernel, Vec2 x);

// Reconstruction on the edge-scale lattice around x0. The caller feeds the
// sinogram matching `part` (noiseless data, noise-only data, or their sum);
// the label is carried on the patch for downstream preconditions.
// Requires |x0| + eps (rho + 1) < P.
LocalPatch fbp_patch(const Sinogram& sino, const Kernel& kernel, Vec2 x0, double rho,
                     double h = 0.125, LocalPatch::Part part = LocalPatch::Part::full);

// Least-squares constant offset and sup-norm residual of the smoothed-edge
// model on a deterministic patch. theta0 must be a nonzero direction.
DtbFit dtb_residual(const LocalPatch& patch, Vec2 theta0, double delta_f,
                    const Kernel& kernel);

// Reconstruction on a macro grid covering bbox with the given step.
// Requires the bbox corners to lie inside the scanned support.
ImageGrid fbp_image(const Sinogram& sino, const Kernel& kernel, const BoundingBox& bbox,
                    double step);

// Symmetric lattice nodes of the given step inside the closed disk of radius
// rho, in a fixed row-major order; each node carries quadrature weight
// step^2. Shared by the disk statistic and the influence weights so the two
// evaluation paths use the identical rule.
std::vector<Vec2> disk_quadrature_nodes(double rho, double step);

// Influence weights for F = integral over the rho-disk of ycheck times the
// reconstruction at x0 + eps ycheck, by the midpoint rule on
// disk_quadrature_nodes(rho, quadrature_step). A non-positive
// quadrature_step selects the default rho / 64.
InfluenceWeights influence_weights(const SamplingGrid& grid, const Kernel& kernel, Vec2 x0,
                                   double rho, double quadrature_step = 0.0);

// CSV export: header "x,y,value", one row per grid point.
void write_image_csv(const ImageGrid& image, const std::string& path);

// 16-bit binary PGM, min-max scaled, top row = largest y; scale factors and
// grid geometry go to a JSON sidecar at path + ".json".
void write_image_pgm(const ImageGrid& image, const std::string& path);

} // namespace ctedge
