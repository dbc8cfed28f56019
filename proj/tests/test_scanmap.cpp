#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "ctedge/covariance.hpp"
#include "ctedge/errors.hpp"
#include "ctedge/phantom.hpp"
#include "ctedge/reconstructor.hpp"
#include "ctedge/sampling.hpp"
#include "ctedge/scanmap.hpp"

using ctedge::BoundingBox;
using ctedge::CovContext;
using ctedge::EdgeMap;
using ctedge::ImageGrid;
using ctedge::Kernel;
using ctedge::NoiseModel;
using ctedge::Phantom;
using ctedge::SamplingGrid;
using ctedge::ScanConfig;
using ctedge::Sinogram;
using ctedge::ThresholdPolicy;
using ctedge::Vec2;

namespace {

constexpr double kDegree = 180.0 / M_PI;

const Kernel& default_kernel() {
    static const Kernel k = Kernel::bspline(4);
    return k;
}

ImageGrid zero_image(double span, double step) {
    ImageGrid img;
    img.x_min = -span;
    img.y_min = -span;
    img.step = step;
    img.nx = img.ny = 2 * static_cast<int>(std::lround(span / step)) + 1;
    img.values.assign(static_cast<std::size_t>(img.nx) * img.ny, 0.0);
    return img;
}

// Acute angle between two directions identified up to sign, in degrees.
double axial_gap_deg(double theta_a, double theta_b) {
    double d = std::fmod(std::abs(theta_a - theta_b), M_PI);
    d = std::min(d, M_PI - d);
    return d * kDegree;
}

} // namespace

TEST_CASE("zero image yields an empty field") {
    const double eps = 0.02;
    const SamplingGrid grid = SamplingGrid::natural(eps);
    const NoiseModel noise = NoiseModel::constant(std::sqrt(3.0));
    const CovContext ctx(default_kernel(), noise, grid, {0.0, 0.0});
    ScanConfig cfg;
    cfg.epsilon = eps;

    const ImageGrid img = zero_image(0.2, eps / 4.0);
    EdgeMap map = ctedge::scan(img, cfg, ctx);
    CHECK(map.ncx > 3);
    CHECK(map.ncx == map.ncy);
    CHECK(map.stride == 6);
    for (std::size_t c = 0; c < map.mag.size(); ++c) {
        CHECK(map.mag[c] == 0.0);
        CHECK(map.sign[c] == 0);
        CHECK(map.p_value[c] == 1.0);
        CHECK(map.nu_sq[c] == doctest::Approx(283.456772).epsilon(1e-4));
        CHECK(map.mask[c] == 0);
    }
    CHECK(map.quiver.empty());

    // A relative threshold cannot mask anything on an all-zero field.
    ctedge::extract_edges(map, ThresholdPolicy{0.99, 0.5});
    CHECK(std::count(map.mask.begin(), map.mask.end(), 1) == 0);
}

TEST_CASE("scan rejects bad configurations") {
    const double eps = 0.02;
    const SamplingGrid grid = SamplingGrid::natural(eps);
    const CovContext ctx(default_kernel(), NoiseModel::constant(1.0), grid, {0.0, 0.0});
    ScanConfig cfg;
    cfg.epsilon = eps;

    ImageGrid coarse = zero_image(0.2, eps / 2.0);
    CHECK_THROWS_AS(ctedge::scan(coarse, cfg, ctx), ctedge::ConfigError);

    ImageGrid tiny = zero_image(0.01, eps / 4.0);
    CHECK_THROWS_AS(ctedge::scan(tiny, cfg, ctx), ctedge::ConfigError);

    ImageGrid ok = zero_image(0.2, eps / 4.0);
    ScanConfig bad_stride = cfg;
    bad_stride.stride = -2;
    CHECK_THROWS_AS(ctedge::scan(ok, bad_stride, ctx), ctedge::ConfigError);
    ScanConfig bad_rho = cfg;
    bad_rho.rho = 0.0;
    CHECK_THROWS_AS(ctedge::scan(ok, bad_rho, ctx), ctedge::ConfigError);
}

TEST_CASE("scan localizes a disk edge and aligns with its normals") {
    const double eps = 0.02;
    const Vec2 c{0.03, -0.05};
    const double r = 0.21;
    const SamplingGrid grid = SamplingGrid::natural(eps);
    const NoiseModel noise = NoiseModel::constant(std::sqrt(3.0));
    const CovContext ctx(default_kernel(), noise, grid, c);
    const Sinogram sino = ctedge::sample_radon(Phantom::single_disk(c, r, 1.0), grid);
    const BoundingBox bbox{c.x - 0.30, c.x + 0.30, c.y - 0.30, c.y + 0.30};
    const ImageGrid img = ctedge::fbp_image(sino, default_kernel(), bbox, eps / 4.0);

    ScanConfig cfg;
    cfg.epsilon = eps;
    EdgeMap map = ctedge::scan(img, cfg, ctx);

    const double max_mag = *std::max_element(map.mag.begin(), map.mag.end());
    // Peak response near the theoretical edge response 16.79.
    CHECK(max_mag > 15.5);
    CHECK(max_mag < 17.0);

    // Strong responses sit on the circle; weak ones sit away from it.
    std::vector<double> sorted = map.mag;
    std::sort(sorted.begin(), sorted.end());
    const double decile = sorted[static_cast<std::size_t>(0.9 * sorted.size())];
    for (std::size_t i = 0; i < map.mag.size(); ++i) {
        const double d = std::abs((map.centers[i] - c).norm() - r);
        if (map.mag[i] >= decile) CHECK(d <= 2.0 * eps);
        if (d >= 4.0 * eps) CHECK(map.mag[i] <= 0.1 * max_mag);
    }

    // Direction-independent sensitivity: per angular bin, the best response
    // within 1.5 eps of the circle varies by less than 15%, and its
    // direction is radial.
    const int nbins = 36;
    std::vector<double> best(nbins, 0.0);
    std::vector<int> best_idx(nbins, -1);
    for (std::size_t i = 0; i < map.mag.size(); ++i) {
        const Vec2 rel = map.centers[i] - c;
        if (std::abs(rel.norm() - r) > 1.5 * eps) continue;
        const int b = std::clamp(
            static_cast<int>((std::atan2(rel.y, rel.x) + M_PI) / (2.0 * M_PI) * nbins),
            0, nbins - 1);
        if (map.mag[i] > best[b]) {
            best[b] = map.mag[i];
            best_idx[b] = static_cast<int>(i);
        }
    }
    std::vector<double> angle_errors;
    double ring_min = max_mag, ring_max = 0.0;
    for (int b = 0; b < nbins; ++b) {
        REQUIRE(best_idx[b] >= 0);
        ring_min = std::min(ring_min, best[b]);
        ring_max = std::max(ring_max, best[b]);
        const Vec2 rel = map.centers[best_idx[b]] - c;
        angle_errors.push_back(axial_gap_deg(map.theta[best_idx[b]], rel.angle()));
    }
    CHECK(ring_min / ring_max > 0.85);
    std::sort(angle_errors.begin(), angle_errors.end());
    CHECK(angle_errors[angle_errors.size() / 2] <= 5.0);
    CHECK(angle_errors.back() <= 3.0 + 2.0); // generous cap on the worst bin

    // At the conformant noise scale sigma^2 = 3 the edge response is about
    // one null standard deviation, so the default 0.99 null quantile masks
    // nothing on noiseless data.
    CHECK(map.quiver.empty());

    // A relative threshold recovers the circle to within two edge scales.
    ctedge::extract_edges(map, ThresholdPolicy{0.99, 0.5});
    std::vector<Vec2> masked;
    for (std::size_t i = 0; i < map.mask.size(); ++i)
        if (map.mask[i]) masked.push_back(map.centers[i]);
    REQUIRE(masked.size() > 20);
    CHECK(map.quiver.size() == masked.size());
    const double haus =
        ctedge::hausdorff_distance(masked, ctedge::circle_points(c, r, 2048));
    CHECK(haus <= 2.0 * eps);
    for (const ctedge::QuiverArrow& q : map.quiver) {
        CHECK(q.dir.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(q.mag >= 0.5 * max_mag);
    }

    // The field is exactly linear in the image.
    ImageGrid doubled = img;
    for (double& v : doubled.values) v *= 2.0;
    const EdgeMap map2 = ctedge::scan(doubled, cfg, ctx);
    REQUIRE(map2.f.size() == map.f.size());
    for (std::size_t i = 0; i < map.f.size(); ++i) {
        CHECK(map2.f[i].x == 2.0 * map.f[i].x);
        CHECK(map2.f[i].y == 2.0 * map.f[i].y);
    }
}

TEST_CASE("rotating the scene by ninety degrees permutes the map") {
    const double eps = 0.02;
    const SamplingGrid grid = SamplingGrid::natural(eps);
    const NoiseModel noise = NoiseModel::constant(std::sqrt(3.0));
    const CovContext ctx(default_kernel(), noise, grid, {0.0, 0.0});
    const Vec2 c{0.08, -0.04};
    const double r = 0.12;
    const BoundingBox bbox{-0.2, 0.2, -0.2, 0.2};
    const ImageGrid img1 = ctedge::fbp_image(
        ctedge::sample_radon(Phantom::single_disk(c, r, 1.0), grid), default_kernel(),
        bbox, eps / 4.0);
    const ImageGrid img2 = ctedge::fbp_image(
        ctedge::sample_radon(Phantom::single_disk({-c.y, c.x}, r, 1.0), grid),
        default_kernel(), bbox, eps / 4.0);

    ScanConfig cfg;
    cfg.epsilon = eps;
    const EdgeMap e1 = ctedge::scan(img1, cfg, ctx);
    const EdgeMap e2 = ctedge::scan(img2, cfg, ctx);
    REQUIRE(e1.ncx == e2.ncx);
    REQUIRE(e1.ncy == e2.ncy);

    // The symmetric center lattice maps onto itself under rotation, so each
    // rotated center must hit another center exactly.
    const double max_mag = *std::max_element(e1.mag.begin(), e1.mag.end());
    std::vector<double> theta_gaps;
    int matched = 0;
    for (std::size_t i = 0; i < e1.mag.size(); ++i) {
        const Vec2 rot{-e1.centers[i].y, e1.centers[i].x};
        const int cx = static_cast<int>(
            std::lround((rot.x - e2.centers.front().x) / e2.center_step));
        const int cy = static_cast<int>(
            std::lround((rot.y - e2.centers.front().y) / e2.center_step));
        REQUIRE(cx >= 0);
        REQUIRE(cx < e2.ncx);
        REQUIRE(cy >= 0);
        REQUIRE(cy < e2.ncy);
        const std::size_t j = e2.index(cx, cy);
        REQUIRE((e2.centers[j] - rot).norm() <= 1e-9);
        ++matched;
        CHECK(std::abs(e2.mag[j] - e1.mag[i]) <= 0.05 * max_mag);
        if (e1.mag[i] > 0.5 * max_mag)
            theta_gaps.push_back(axial_gap_deg(e2.theta[j], e1.theta[i] + M_PI / 2.0));
    }
    CHECK(matched == e1.ncx * e1.ncy);
    REQUIRE(theta_gaps.size() > 10);
    std::sort(theta_gaps.begin(), theta_gaps.end());
    CHECK(theta_gaps[theta_gaps.size() / 2] <= 2.0);
    CHECK(theta_gaps.back() <= 5.0);
}

TEST_CASE("pure-noise p-values are calibrated per center") {
    const double eps = 0.05;
    const SamplingGrid grid = SamplingGrid::natural(eps);
    const NoiseModel noise = NoiseModel::constant(std::sqrt(3.0));
    const CovContext ctx(default_kernel(), noise, grid, {0.0, 0.0});

    ScanConfig cfg;
    cfg.epsilon = eps;
    cfg.stride = 24; // separates centers by four window radii

    Sinogram sino;
    sino.grid = grid;
    std::vector<double> p_all;
    int masked_high_q = 0;
    for (int draw = 0; draw < 16; ++draw) {
        sino.values = ctedge::draw_noise(grid, noise, 1000, draw);
        const ImageGrid img =
            ctedge::fbp_image(sino, default_kernel(), {-0.5, 0.5, -0.5, 0.5}, eps / 4.0);
        EdgeMap map = ctedge::scan(img, cfg, ctx);
        REQUIRE(map.mag.size() == 9);
        for (double p : map.p_value) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            p_all.push_back(p);
        }
        ctedge::extract_edges(map, ThresholdPolicy{0.999999, 0.0});
        masked_high_q += static_cast<int>(
            std::count(map.mask.begin(), map.mask.end(), std::uint8_t{1}));
    }
    CHECK(masked_high_q == 0);

    const double n = static_cast<double>(p_all.size());
    REQUIRE(n == 144.0);
    double mean = 0.0;
    int below_1 = 0, below_25 = 0;
    for (double p : p_all) {
        mean += p;
        below_1 += p < 0.01;
        below_25 += p < 0.25;
    }
    mean /= n;
    CHECK(mean > 0.39);
    CHECK(mean < 0.61);
    CHECK(below_1 <= 7);
    CHECK(below_25 >= 12);
    CHECK(below_25 <= 60);
}

TEST_CASE("position-dependent noise gets per-center dispersions") {
    const double eps = 0.02;
    const SamplingGrid grid = SamplingGrid::natural(eps);
    NoiseModel noise = NoiseModel::constant(1.0);
    noise.sigma = [](double alpha, double p) { return 1.0 + 0.5 * p * std::sin(alpha); };
    REQUIRE(noise.parity_holds(grid));
    const CovContext ctx(default_kernel(), noise, grid, {0.0, 0.0});

    ScanConfig cfg;
    cfg.epsilon = eps;
    cfg.stride = 3;
    const ImageGrid img = zero_image(0.075, eps / 4.0);
    const EdgeMap map = ctedge::scan(img, cfg, ctx);
    REQUIRE(map.mag.size() >= 9);
    double lo = map.nu_sq.front(), hi = map.nu_sq.front();
    for (std::size_t c = 0; c < map.nu_sq.size(); ++c) {
        lo = std::min(lo, map.nu_sq[c]);
        hi = std::max(hi, map.nu_sq[c]);
        CHECK(map.nu_sq[c] > 0.0);
        CHECK(map.p_value[c] == 1.0);
        CHECK(map.mask[c] == 0);
    }
    // The dispersion actually varies across centers.
    CHECK((hi - lo) / hi > 0.005);
}

TEST_CASE("hausdorff distance and circle sampling") {
    using ctedge::circle_points;
    using ctedge::hausdorff_distance;

    CHECK(hausdorff_distance({{0.0, 0.0}}, {{3.0, 4.0}}) == doctest::Approx(5.0));
    CHECK(hausdorff_distance({{0.0, 0.0}, {10.0, 0.0}}, {{0.0, 0.0}}) ==
          doctest::Approx(10.0));
    const std::vector<Vec2> a = {{0.0, 0.0}, {1.0, 1.0}};
    const std::vector<Vec2> b = {{0.5, 0.0}, {1.0, 0.5}};
    CHECK(hausdorff_distance(a, b) == doctest::Approx(hausdorff_distance(b, a)));
    CHECK_THROWS_AS(hausdorff_distance({}, {{1.0, 0.0}}), ctedge::PreconditionError);

    const std::vector<Vec2> circ = circle_points({1.0, -2.0}, 3.0, 720);
    CHECK(circ.size() == 720);
    for (const Vec2& p : circ)
        CHECK((p - Vec2{1.0, -2.0}).norm() == doctest::Approx(3.0).epsilon(1e-12));
    // Refining the discretization moves points by at most one chord.
    const double gap =
        hausdorff_distance(circ, circle_points({1.0, -2.0}, 3.0, 1440));
    CHECK(gap <= 2.0 * M_PI * 3.0 / 720.0);
    CHECK_THROWS_AS(circle_points({0.0, 0.0}, 1.0, 2), ctedge::PreconditionError);
}

TEST_CASE("threshold policies and exports") {
    EdgeMap map;
    map.ncx = 3;
    map.ncy = 2;
    map.stride = 2;
    map.center_step = 0.5;
    map.centers = {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0},
                   {0.0, 0.5}, {0.5, 0.5}, {1.0, 0.5}};
    map.f = {{3.0, 0.0}, {0.0, 1.0}, {-2.0, 0.0},
             {0.0, 0.0}, {1.0, 1.0}, {0.0, -4.0}};
    for (const Vec2& v : map.f) map.mag.push_back(v.norm());
    map.theta.assign(6, 0.0);
    map.sign.assign(6, 1);
    map.nu_sq.assign(6, 1.0);
    for (double m : map.mag) map.p_value.push_back(std::exp(-0.5 * m * m));

    ctedge::extract_edges(map, ThresholdPolicy{0.99, 0.0});
    // Rayleigh threshold at q = 0.99 and nu = 1 is sqrt(-2 ln 0.01) = 3.03.
    CHECK(map.mask == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1});
    CHECK(map.quiver.size() == 1);
    CHECK(map.quiver[0].dir.y == doctest::Approx(-1.0));

    ctedge::extract_edges(map, ThresholdPolicy{0.99, 0.6});
    CHECK(map.mask == std::vector<std::uint8_t>{1, 0, 0, 0, 0, 1});

    CHECK_THROWS_AS(ctedge::extract_edges(map, ThresholdPolicy{0.0, 0.0}),
                    ctedge::ConfigError);
    CHECK_THROWS_AS(ctedge::extract_edges(map, ThresholdPolicy{1.0, 0.0}),
                    ctedge::ConfigError);
    CHECK_THROWS_AS(ctedge::extract_edges(map, ThresholdPolicy{0.5, 1.5}),
                    ctedge::ConfigError);

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ctedge_scan_csv";
    fs::create_directories(dir);
    auto lines = [](const fs::path& p) {
        std::ifstream in(p);
        int n = 0;
        std::string line;
        while (std::getline(in, line)) ++n;
        return n;
    };
    const fs::path mag_csv = dir / "edgemap_mag.csv";
    ctedge::write_edgemap_mag_csv(map, mag_csv.string());
    CHECK(lines(mag_csv) == 7);
    {
        std::ifstream in(mag_csv);
        std::string header;
        std::getline(in, header);
        CHECK(header == "x,y,mag");
    }
    const fs::path theta_csv = dir / "edgemap_theta.csv";
    ctedge::write_edgemap_theta_csv(map, theta_csv.string());
    CHECK(lines(theta_csv) == 7);
    const fs::path quiver_csv = dir / "quiver.csv";
    ctedge::write_quiver_csv(map, quiver_csv.string());
    CHECK(lines(quiver_csv) == 1 + static_cast<int>(map.quiver.size()));
    const fs::path pgm = dir / "edgemap_mag.pgm";
    ctedge::write_edgemap_mag_pgm(map, pgm.string());
    CHECK(fs::exists(pgm));
    CHECK(fs::exists(pgm.string() + ".json"));
    fs::remove_all(dir);
}
