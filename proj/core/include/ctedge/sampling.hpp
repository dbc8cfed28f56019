#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctedge/phantom.hpp"

namespace ctedge {

// Discrete data lattice: angles alpha_k = k * (kappa * epsilon) covering
// [-pi, pi) and affine offsets p_j = p_bar + j * epsilon covering [-P, P].
struct SamplingGrid {
    double epsilon = 0.007; // p step
    double kappa = 2.0 * M_PI; // angle step / p step
    double p_bar = 0.0;
    double P = 1.0;
    int k_min = 0, k_max = -1;
    int j_min = 0, j_max = -1;

    // Index ranges derived from the step sizes and extents.
    static SamplingGrid natural(double epsilon = 0.007,
                                double kappa = 2.0 * M_PI, double p_bar = 0.0,
                                double P = 1.0);

    double delta_alpha() const { return kappa * epsilon; }
    double alpha(int k) const { return k * delta_alpha(); }
    double p(int j) const { return p_bar + j * epsilon; }

    int n_alpha() const { return k_max - k_min + 1; }
    int n_p() const { return j_max - j_min + 1; }
    std::size_t size() const {
        return static_cast<std::size_t>(n_alpha()) * n_p();
    }
    std::size_t cell_index(int k, int j) const {
        return static_cast<std::size_t>(k - k_min) * n_p() + (j - j_min);
    }
};

// Noise field on the lattice: independent, mean zero, with standard
// deviation sigma(alpha, p) * sqrt(delta_alpha) * vartheta(epsilon)
// (or sigma directly when raw_std is set).
struct NoiseModel {
    enum class Family { uniform, gaussian };

    Family family = Family::uniform;
    std::function<double(double alpha, double p)> sigma;
    std::function<double(double epsilon)> vartheta; // default: 1
    bool raw_std = false;

    static NoiseModel constant(double sigma_value,
                               Family family = Family::uniform,
                               bool raw_std = false);

    // Smooth angle-dependent preset sigma(alpha, p) =
    // base * (1 + modulation * cos(2 alpha)); satisfies the parity
    // sigma(alpha + pi, -p) = sigma(alpha, p) for any modulation in [0, 1).
    static NoiseModel angular(double base, double modulation,
                              Family family = Family::uniform);

    double std_dev(double alpha, double p, const SamplingGrid& grid) const;

    // Verifies sigma(alpha + pi, -p) = sigma(alpha, p) over the grid.
    bool parity_holds(const SamplingGrid& grid, double tol = 1e-12) const;
};

struct Sinogram {
    SamplingGrid grid;
    std::vector<double> values; // row-major [k][j]

    double& at(int k, int j) { return values[grid.cell_index(k, j)]; }
    double at(int k, int j) const { return values[grid.cell_index(k, j)]; }
};

// Exact line integrals of the phantom on the lattice.
Sinogram sample_radon(const Phantom& phantom, const SamplingGrid& grid);

// Noise array indexed by cell_index; a pure function of
// (seed, replicate, cell), so replicates can be drawn concurrently.
std::vector<double> draw_noise(const SamplingGrid& grid,
                               const NoiseModel& model, std::uint64_t seed,
                               std::uint64_t replicate = 0);

Sinogram add_noise(const Sinogram& sinogram,
                   const std::vector<double>& noise);

// Pixel binning: N x N block means on a coarser lattice with epsilon' =
// N epsilon (kappa preserved); incomplete edge blocks are dropped.
Sinogram bin(const Sinogram& sinogram, int N);

void write_sma(const Sinogram& sinogram, const std::string& path);
Sinogram read_sma(const std::string& path);
void write_sinogram_csv(const Sinogram& sinogram, const std::string& path);

} // namespace ctedge
