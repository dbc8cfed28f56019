#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctedge/covariance.hpp"
#include "ctedge/inference.hpp"
#include "ctedge/kernel.hpp"
#include "ctedge/montecarlo.hpp"
#include "ctedge/phantom.hpp"
#include "ctedge/sampling.hpp"

namespace ctedge::cli {

// Resolved experiment configuration: every key of the config file with its
// default filled in. The file format is a flat `key = value` list (strings,
// numbers, booleans, and [..] lists of numbers; `#` starts a comment);
// unknown or duplicate keys are rejected so configs stay archivable.
struct RunConfig {
    // scene: cx, cy, r, amp quadruples plus the scene support radius
    std::vector<double> disks{0.0, -0.1, 0.345, 1.0};
    double support = 1.0;

    // sampling lattice
    double grid_epsilon = 0.007;
    double grid_kappa = 2.0 * M_PI;
    double grid_p_bar = 0.0;
    double grid_P = 1.0;

    // data noise
    double noise_sigma = std::sqrt(3.0);
    std::string noise_family = "uniform"; // "uniform" | "gaussian"
    bool noise_raw_std = false;
    std::string noise_vartheta = "one"; // "one" | "sqrt-eps-over-kappa"
    double noise_modulation = 0.0;      // angle-dependent sigma preset when nonzero

    // reconstruction kernel
    std::string kernel_name = "bspline4"; // "bspline4" | "bspline3" | "trapezoid"
    double kernel_truncation = 64.0;

    // probed edge point: disk index and boundary polar angle
    int edge_disk = 0;
    double edge_angle = 0.0;

    // statistic
    double rho = 3.0;
    std::string statistic = "2d"; // "2d" | "linear" | "sign"
    double alpha = 0.05;

    // replication
    int n_null = 10000;
    int n_alt = 10000;
    std::uint64_t seed = 1;
    bool independent_alt = false;
    double mc_quadrature_step = 0.125;
    double mc_segment_step = 0.125;
    bool mc_force_direct = false;

    // noise level assumed by the test side (covariances); <= 0 means
    // "same as noise.sigma". Letting the two differ supports noiseless
    // data checked against a positive-noise test.
    double test_sigma = 0.0;

    // reconstruction targets
    std::string recon_target = "image"; // "image" | "patch"
    double patch_h = 0.125;
    double image_x_min = -0.448, image_x_max = 0.448;
    double image_y_min = -0.548, image_y_max = 0.348;
    double image_step = 0.00175;

    // sliding-window scan
    int scan_stride = 0;
    double scan_quantile = 0.99;
    double scan_fraction = 0.0;
    bool scan_noiseless = false;

    // noise-level sweep for power curves
    std::vector<double> sigma_grid;

    // uncertainty reporting level
    double uq_level = 0.95;

    std::string out_dir = "out";

    // Builders; each module validates its own fields.
    Phantom phantom() const;
    SamplingGrid grid() const;
    Kernel kernel() const;
    NoiseModel noise() const;      // data-generating noise
    NoiseModel test_noise() const; // same convention at the test sigma
    EdgePoint edge() const;
    StatKind stat_kind() const;
    Weight1d weight_1d() const; // throws for "2d"
    ExperimentSpec experiment() const;

    nlohmann::json to_json() const;

    // FNV-1a digest of the canonical key=value serialization; stamped into
    // every artifact header.
    std::string hash() const;
};

// Parses the flat config format; throws ConfigError naming the offending
// key or line.
RunConfig parse_config_text(const std::string& text);

// Reads and parses a config file; throws IoError when unreadable.
RunConfig load_config(const std::string& path);

} // namespace ctedge::cli
