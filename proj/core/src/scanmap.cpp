#include "ctedge/scanmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ctedge/errors.hpp"
#include "ctedge/parallel.hpp"

namespace ctedge {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CenterAxis {
    int start = 0;
    int count = 0;
};

// Symmetric placement of `count` centers inside [first, last]: leftover
// span is split evenly so a symmetric image yields a symmetric lattice.
CenterAxis place_centers(int first, int last, int stride) {
    if (last < first) throw ConfigError("scan window exits the image");
    CenterAxis axis;
    axis.count = (last - first) / stride + 1;
    const int slack = (last - first) - (axis.count - 1) * stride;
    axis.start = first + slack / 2;
    return axis;
}

bool sigma_is_constant(const CovContext& ctx, double p_reach) {
    const double ref = ctx.sigma(0.0, 0.0);
    for (int ia = 0; ia < 8; ++ia) {
        const double alpha = 2.0 * kPi * ia / 8.0;
        for (int ip = -3; ip <= 3; ++ip) {
            const double p = p_reach * ip / 3.0;
            if (std::abs(ctx.sigma(alpha, p) - ref) > 1e-12 * (std::abs(ref) + 1.0))
                return false;
        }
    }
    return true;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out.precision(12);
    return out;
}

} // namespace

EdgeMap scan(const ImageGrid& image, const ScanConfig& config, const CovContext& ctx) {
    if (config.rho <= 0.0 || config.epsilon <= 0.0)
        throw ConfigError("scan requires positive window radius and epsilon");
    if (image.nx <= 0 || image.ny <= 0 || image.step <= 0.0)
        throw ConfigError("scan requires a non-empty image grid");
    const double h = image.step / config.epsilon;
    if (h > 0.25 + 1e-12)
        throw ConfigError("image step must be at most a quarter of epsilon");
    if (config.stride < 0)
        throw ConfigError("stride must be at least one image cell");
    const int stride = config.stride > 0
                           ? config.stride
                           : std::max(1, static_cast<int>(std::lround(0.5 * config.rho / h)));

    // Window nodes as exact image-index offsets; weights carry the h^2
    // quadrature measure so F = sum image * (wx, wy).
    const std::vector<Vec2> nodes = disk_quadrature_nodes(config.rho, h);
    const std::size_t n_nodes = nodes.size();
    std::vector<int> di(n_nodes), dj(n_nodes);
    std::vector<double> wx(n_nodes), wy(n_nodes);
    int margin = 0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        di[i] = static_cast<int>(std::lround(nodes[i].x / h));
        dj[i] = static_cast<int>(std::lround(nodes[i].y / h));
        margin = std::max({margin, std::abs(di[i]), std::abs(dj[i])});
        wx[i] = nodes[i].x * h * h;
        wy[i] = nodes[i].y * h * h;
    }

    const CenterAxis ax = place_centers(margin, image.nx - 1 - margin, stride);
    const CenterAxis ay = place_centers(margin, image.ny - 1 - margin, stride);

    EdgeMap map;
    map.ncx = ax.count;
    map.ncy = ay.count;
    map.stride = stride;
    map.center_step = stride * image.step;
    const std::size_t n_centers = static_cast<std::size_t>(ax.count) * ay.count;
    map.centers.resize(n_centers);
    map.f.resize(n_centers);
    map.mag.resize(n_centers);
    map.theta.assign(n_centers, 0.0);
    map.sign.assign(n_centers, 0);
    map.nu_sq.resize(n_centers);
    map.p_value.resize(n_centers);

    parallel_for(static_cast<int>(n_centers), [&](int c) {
        const int cx = ax.start + (c % map.ncx) * stride;
        const int cy = ay.start + (c / map.ncx) * stride;
        map.centers[c] = {image.x(cx), image.y(cy)};
        double fx = 0.0, fy = 0.0;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const double v = image.at(cx + di[i], cy + dj[i]);
            fx += v * wx[i];
            fy += v * wy[i];
        }
        map.f[c] = {fx, fy};
        map.mag[c] = map.f[c].norm();
        if (map.mag[c] > 0.0) {
            double phi = std::atan2(fy, fx);
            if (phi < 0.0) {
                map.theta[c] = phi + kPi;
                map.sign[c] = -1;
            } else if (phi >= kPi) {
                map.theta[c] = phi - kPi;
                map.sign[c] = -1;
            } else {
                map.theta[c] = phi;
                map.sign[c] = 1;
            }
        }
    });

    double p_reach = 0.0;
    for (const Vec2& x : map.centers) p_reach = std::max(p_reach, x.norm());
    if (sigma_is_constant(ctx, p_reach)) {
        const double nu2 = nu_sq(ctx, config.rho);
        for (std::size_t c = 0; c < n_centers; ++c) {
            map.nu_sq[c] = nu2;
            map.p_value[c] = nu2 > 0.0
                                 ? std::exp(-0.5 * map.mag[c] * map.mag[c] / nu2)
                                 : (map.mag[c] > 0.0 ? 0.0 : 1.0);
        }
    } else {
        cov_matrix(ctx, config.rho); // warm the shared radial factor once
        parallel_for(static_cast<int>(n_centers), [&](int c) {
            CovContext local = ctx;
            local.x0 = map.centers[c];
            const SymMat2 cov = cov_matrix(local, config.rho);
            map.nu_sq[c] = 0.5 * (cov.a + cov.c);
            const double z = cov.inverse().quad_form(map.f[c]);
            map.p_value[c] = std::exp(-0.5 * z);
        });
    }

    extract_edges(map, config.policy);
    return map;
}

void extract_edges(EdgeMap& map, const ThresholdPolicy& policy) {
    const std::size_t n = map.mag.size();
    map.mask.assign(n, 0);
    map.quiver.clear();
    if (policy.relative_fraction > 0.0) {
        if (policy.relative_fraction > 1.0)
            throw ConfigError("relative threshold fraction must lie in (0, 1]");
        const double max_mag = n ? *std::max_element(map.mag.begin(), map.mag.end()) : 0.0;
        const double tau = policy.relative_fraction * max_mag;
        for (std::size_t c = 0; c < n; ++c)
            map.mask[c] = (map.mag[c] > 0.0 && map.mag[c] >= tau) ? 1 : 0;
    } else {
        if (!(policy.null_quantile > 0.0 && policy.null_quantile < 1.0))
            throw ConfigError("null quantile must lie in (0, 1)");
        const double p_cut = 1.0 - policy.null_quantile;
        for (std::size_t c = 0; c < n; ++c)
            map.mask[c] = (map.mag[c] > 0.0 && map.p_value[c] < p_cut) ? 1 : 0;
    }
    for (std::size_t c = 0; c < n; ++c) {
        if (!map.mask[c]) continue;
        map.quiver.push_back({map.centers[c], map.f[c] * (1.0 / map.mag[c]),
                              map.mag[c], map.p_value[c]});
    }
}

double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    if (a.empty() || b.empty())
        throw PreconditionError("hausdorff_distance needs two non-empty sets");
    auto directed = [](const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
        double worst = 0.0;
        for (const Vec2& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec2& q : to) {
                const double dx = p.x - q.x, dy = p.y - q.y;
                best = std::min(best, dx * dx + dy * dy);
            }
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(directed(a, b), directed(b, a));
}

std::vector<Vec2> circle_points(Vec2 center, double radius, int n) {
    if (n < 3 || radius <= 0.0)
        throw PreconditionError("circle_points needs radius > 0 and n >= 3");
    std::vector<Vec2> pts(n);
    for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * kPi * i / n;
        pts[i] = {center.x + radius * std::cos(phi), center.y + radius * std::sin(phi)};
    }
    return pts;
}

void write_edgemap_mag_csv(const EdgeMap& map, const std::string& path) {
    std::ofstream out = open_csv(path);
    out << "x,y,mag\n";
    for (std::size_t c = 0; c < map.mag.size(); ++c)
        out << map.centers[c].x << ',' << map.centers[c].y << ',' << map.mag[c] << '\n';
}

void write_edgemap_theta_csv(const EdgeMap& map, const std::string& path) {
    std::ofstream out = open_csv(path);
    out << "x,y,theta,sign\n";
    for (std::size_t c = 0; c < map.theta.size(); ++c)
        out << map.centers[c].x << ',' << map.centers[c].y << ',' << map.theta[c]
            << ',' << static_cast<int>(map.sign[c]) << '\n';
}

void write_quiver_csv(const EdgeMap& map, const std::string& path) {
    std::ofstream out = open_csv(path);
    out << "x,y,ux,uy,mag,p_value\n";
    for (const QuiverArrow& q : map.quiver)
        out << q.center.x << ',' << q.center.y << ',' << q.dir.x << ',' << q.dir.y
            << ',' << q.mag << ',' << q.p_value << '\n';
}

void write_edgemap_mag_pgm(const EdgeMap& map, const std::string& path) {
    if (map.centers.empty()) throw PreconditionError("empty edge map");
    ImageGrid grid;
    grid.x_min = map.centers.front().x;
    grid.y_min = map.centers.front().y;
    grid.step = map.center_step;
    grid.nx = map.ncx;
    grid.ny = map.ncy;
    grid.values = map.mag;
    write_image_pgm(grid, path);
}

} // namespace ctedge
