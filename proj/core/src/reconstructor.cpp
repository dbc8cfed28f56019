#include "ctedge/reconstructor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ctedge/errors.hpp"
#include "ctedge/parallel.hpp"

namespace ctedge {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Per-view direction cosines and the summation prefactor, shared by every
// evaluation path so they stay bit-identical.
struct FbpEval {
    const SamplingGrid& grid;
    const Kernel& kernel;
    std::vector<double> cos_a, sin_a;
    double pref;

    FbpEval(const SamplingGrid& g, const Kernel& k) : grid(g), kernel(k) {
        const int n = g.n_alpha();
        cos_a.resize(n);
        sin_a.resize(n);
        for (int kk = g.k_min; kk <= g.k_max; ++kk) {
            cos_a[kk - g.k_min] = std::cos(g.alpha(kk));
            sin_a[kk - g.k_min] = std::sin(g.alpha(kk));
        }
        pref = g.delta_alpha() / (4.0 * kPi * g.epsilon);
    }

    // Visits every nonzero term of the backprojection sum at x, in the fixed
    // order k outer / j inner. fn receives (k, j, Hphi' argument value).
    template <class Fn>
    void for_each_term(Vec2 x, Fn&& fn) const {
        const double trunc = kernel.hilbert_truncation();
        for (int kk = grid.k_min; kk <= grid.k_max; ++kk) {
            const double t = cos_a[kk - grid.k_min] * x.x + sin_a[kk - grid.k_min] * x.y;
            const double base = (t - grid.p_bar) / grid.epsilon; // argument = base - j
            const int j_lo = std::max(grid.j_min,
                                      static_cast<int>(std::ceil(base - trunc - 1e-12)));
            const int j_hi = std::min(grid.j_max,
                                      static_cast<int>(std::floor(base + trunc + 1e-12)));
            for (int j = j_lo; j <= j_hi; ++j)
                fn(kk, j, kernel.hilbert_dphi(base - j));
        }
    }

    double value(const Sinogram& sino, Vec2 x) const {
        double sum = 0.0;
        for_each_term(x, [&](int kk, int j, double w) { sum += w * sino.at(kk, j); });
        return pref * sum;
    }
};

void check_point_support(const SamplingGrid& grid, Vec2 x) {
    if (x.norm() >= grid.P)
        throw ConfigError("reconstruction point lies outside the scanned support");
}

FILE* open_or_throw(const std::string& path, const char* mode) {
    FILE* f = std::fopen(path.c_str(), mode);
    if (!f) throw IoError("cannot open " + path);
    return f;
}

} // namespace

double fbp_value(const Sinogram& sino, const Kernel& kernel, Vec2 x) {
    check_point_support(sino.grid, x);
    return FbpEval(sino.grid, kernel).value(sino, x);
}

std::vector<double> fbp_point_weights(const SamplingGrid& grid, const Kernel& kernel, Vec2 x) {
    check_point_support(grid, x);
    FbpEval eval(grid, kernel);
    std::vector<double> plane(grid.size(), 0.0);
    eval.for_each_term(x, [&](int kk, int j, double w) {
        plane[grid.cell_index(kk, j)] += eval.pref * w;
    });
    return plane;
}

LocalPatch fbp_patch(const Sinogram& sino, const Kernel& kernel, Vec2 x0, double rho,
                     double h, LocalPatch::Part part) {
    const SamplingGrid& grid = sino.grid;
    if (!(rho > 0.0) || !(h > 0.0))
        throw ConfigError("patch needs positive rho and grid step");
    if (x0.norm() + grid.epsilon * (rho + 1.0) >= grid.P)
        throw ConfigError("patch exits the scanned support");

    LocalPatch patch;
    patch.x0 = x0;
    patch.epsilon = grid.epsilon;
    patch.rho = rho;
    patch.h = h;
    patch.part = part;
    const int n_half = static_cast<int>(std::floor(rho / h + 1e-9));
    patch.n = 2 * n_half + 1;
    patch.samples.resize(static_cast<std::size_t>(patch.n) * patch.n);

    const FbpEval eval(grid, kernel);
    parallel_for(patch.n, [&](int iy) {
        const double yc = patch.coord(iy);
        for (int ix = 0; ix < patch.n; ++ix) {
            const Vec2 x = x0 + grid.epsilon * Vec2{patch.coord(ix), yc};
            patch.samples[static_cast<std::size_t>(iy) * patch.n + ix] = eval.value(sino, x);
        }
    });
    return patch;
}

DtbFit dtb_residual(const LocalPatch& patch, Vec2 theta0, double delta_f,
                    const Kernel& kernel) {
    if (patch.part != LocalPatch::Part::deterministic)
        throw ConfigError("smoothed-edge fit needs a deterministic patch");
    if (theta0.norm() == 0.0) throw ConfigError("edge direction must be nonzero");
    const Vec2 dir = unit_vector(theta0.angle());

    std::vector<double> model(patch.samples.size());
    double mean_diff = 0.0;
    for (int iy = 0; iy < patch.n; ++iy) {
        for (int ix = 0; ix < patch.n; ++ix) {
            const std::size_t idx = static_cast<std::size_t>(iy) * patch.n + ix;
            const double t = dir.x * patch.coord(ix) + dir.y * patch.coord(iy);
            model[idx] = delta_f * kernel.dtb(t);
            mean_diff += patch.samples[idx] - model[idx];
        }
    }
    mean_diff /= static_cast<double>(patch.samples.size());

    DtbFit fit;
    fit.c_fit = mean_diff;
    for (std::size_t i = 0; i < patch.samples.size(); ++i)
        fit.max_residual =
            std::max(fit.max_residual, std::abs(patch.samples[i] - model[i] - mean_diff));
    return fit;
}

ImageGrid fbp_image(const Sinogram& sino, const Kernel& kernel, const BoundingBox& bbox,
                    double step) {
    if (!(step > 0.0)) throw ConfigError("image step must be positive");
    if (!(bbox.x_max >= bbox.x_min) || !(bbox.y_max >= bbox.y_min))
        throw ConfigError("image bounding box is empty");
    for (double cx : {bbox.x_min, bbox.x_max})
        for (double cy : {bbox.y_min, bbox.y_max})
            check_point_support(sino.grid, {cx, cy});

    ImageGrid image;
    image.x_min = bbox.x_min;
    image.y_min = bbox.y_min;
    image.step = step;
    image.nx = static_cast<int>(std::floor((bbox.x_max - bbox.x_min) / step + 1e-9)) + 1;
    image.ny = static_cast<int>(std::floor((bbox.y_max - bbox.y_min) / step + 1e-9)) + 1;
    image.values.resize(static_cast<std::size_t>(image.nx) * image.ny);

    const FbpEval eval(sino.grid, kernel);
    parallel_for(image.ny, [&](int iy) {
        for (int ix = 0; ix < image.nx; ++ix)
            image.values[static_cast<std::size_t>(iy) * image.nx + ix] =
                eval.value(sino, {image.x(ix), image.y(iy)});
    });
    return image;
}

std::vector<Vec2> disk_quadrature_nodes(double rho, double step) {
    if (!(rho > 0.0) || !(step > 0.0))
        throw ConfigError("disk quadrature needs positive rho and step");
    const int n_half = static_cast<int>(std::floor(rho / step + 1e-9));
    const double limit_sq = rho * rho * (1.0 + 1e-12);
    std::vector<Vec2> nodes;
    for (int iy = -n_half; iy <= n_half; ++iy) {
        for (int ix = -n_half; ix <= n_half; ++ix) {
            const Vec2 p{ix * step, iy * step};
            if (p.norm_sq() <= limit_sq) nodes.push_back(p);
        }
    }
    return nodes;
}

InfluenceWeights influence_weights(const SamplingGrid& grid, const Kernel& kernel, Vec2 x0,
                                   double rho, double quadrature_step) {
    if (!(rho > 0.0)) throw ConfigError("influence weights need a positive rho");
    const double q = quadrature_step > 0.0 ? quadrature_step : rho / 64.0;
    if (x0.norm() + grid.epsilon * (rho + 1.0) >= grid.P)
        throw ConfigError("influence window exits the scanned support");

    InfluenceWeights w;
    w.grid = grid;
    w.x0 = x0;
    w.rho = rho;
    w.quadrature_step = q;
    w.w1.assign(grid.size(), 0.0);
    w.w2.assign(grid.size(), 0.0);

    const std::vector<Vec2> nodes = disk_quadrature_nodes(rho, q);
    const FbpEval eval(grid, kernel);
    const double cell = q * q;
    const double trunc = kernel.hilbert_truncation();

    // k-outer so workers own disjoint rows of the weight planes.
    parallel_for(grid.n_alpha(), [&](int krow) {
        const int kk = grid.k_min + krow;
        const double c = eval.cos_a[krow], s = eval.sin_a[krow];
        const double t0 = c * x0.x + s * x0.y;
        for (const Vec2& node : nodes) {
            const double t = t0 + grid.epsilon * (c * node.x + s * node.y);
            const double base = (t - grid.p_bar) / grid.epsilon;
            const int j_lo = std::max(grid.j_min,
                                      static_cast<int>(std::ceil(base - trunc - 1e-12)));
            const int j_hi = std::min(grid.j_max,
                                      static_cast<int>(std::floor(base + trunc + 1e-12)));
            for (int j = j_lo; j <= j_hi; ++j) {
                const double hv = kernel.hilbert_dphi(base - j);
                const std::size_t idx = grid.cell_index(kk, j);
                w.w1[idx] += node.x * hv;
                w.w2[idx] += node.y * hv;
            }
        }
    });

    const double scale = eval.pref * cell;
    for (std::size_t i = 0; i < w.w1.size(); ++i) {
        w.w1[i] *= scale;
        w.w2[i] *= scale;
    }
    return w;
}

Vec2 InfluenceWeights::apply(const std::vector<double>& values) const {
    if (values.size() != w1.size())
        throw ConfigError("sinogram size does not match the influence weights");
    double f1 = 0.0, f2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        f1 += w1[i] * values[i];
        f2 += w2[i] * values[i];
    }
    return {f1, f2};
}

Vec2 InfluenceWeights::apply(const Sinogram& sino) const {
    if (sino.grid.k_min != grid.k_min || sino.grid.k_max != grid.k_max ||
        sino.grid.j_min != grid.j_min || sino.grid.j_max != grid.j_max ||
        sino.grid.epsilon != grid.epsilon || sino.grid.p_bar != grid.p_bar)
        throw ConfigError("sinogram grid does not match the influence weights");
    return apply(sino.values);
}

void write_image_csv(const ImageGrid& image, const std::string& path) {
    FILE* f = open_or_throw(path, "w");
    std::fprintf(f, "x,y,value\n");
    for (int iy = 0; iy < image.ny; ++iy)
        for (int ix = 0; ix < image.nx; ++ix)
            std::fprintf(f, "%.17g,%.17g,%.17g\n", image.x(ix), image.y(iy),
                         image.at(ix, iy));
    std::fclose(f);
}

void write_image_pgm(const ImageGrid& image, const std::string& path) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : image.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (image.values.empty()) lo = hi = 0.0;
    const double span = hi > lo ? hi - lo : 1.0;

    FILE* f = open_or_throw(path, "wb");
    std::fprintf(f, "P5\n%d %d\n65535\n", image.nx, image.ny);
    for (int iy = image.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < image.nx; ++ix) {
            const double v = (image.at(ix, iy) - lo) / span;
            const unsigned val = static_cast<unsigned>(std::lround(65535.0 * v));
            const unsigned char bytes[2] = {static_cast<unsigned char>(val >> 8),
                                            static_cast<unsigned char>(val & 0xff)};
            std::fwrite(bytes, 1, 2, f);
        }
    }
    std::fclose(f);

    FILE* side = open_or_throw(path + ".json", "w");
    std::fprintf(side,
                 "{\"min\": %.17g, \"max\": %.17g, \"nx\": %d, \"ny\": %d, "
                 "\"x_min\": %.17g, \"y_min\": %.17g, \"step\": %.17g}\n",
                 lo, hi, image.nx, image.ny, image.x_min, image.y_min, image.step);
    std::fclose(side);
}

} // namespace ctedge
