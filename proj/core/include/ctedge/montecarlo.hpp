#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ctedge/inference.hpp"
#include "ctedge/kernel.hpp"
#include "ctedge/linalg.hpp"
#include "ctedge/phantom.hpp"
#include "ctedge/sampling.hpp"
#include "ctedge/vec2.hpp"

namespace ctedge {

// Which edge statistic a replicated experiment evaluates.
enum class StatKind { f_u_sign, f_u_linear, f_2d };

// Full description of a replicated edge-detection experiment.
struct ExperimentSpec {
    Phantom phantom = Phantom::single_disk({0.0, -0.1}, 0.345, 1.0);
    std::size_t boundary_index = 0;
    double boundary_angle = 0.0;
    SamplingGrid grid = SamplingGrid::natural();
    NoiseModel noise = NoiseModel::constant(std::sqrt(3.0));
    Kernel kernel = Kernel::bspline(4);
    double rho = 3.0;
    StatKind kind = StatKind::f_2d;
    int n_null = 10000;
    int n_alt = 10000;
    std::uint64_t seed = 1;
    // Draw fresh noise for the alternative arm instead of reusing the
    // null draws shifted by the deterministic response.
    bool independent_alt = false;
    // Disk quadrature step for the 2D statistic; 0 means rho/64.
    double quadrature_step = 0.0;
    // Midpoint step of the segment integral for the 1D statistics.
    double segment_step = 0.125;
    // Evaluate every replicate through a full local reconstruction instead
    // of the precomputed sinogram weights. Orders of magnitude slower;
    // meant for verification runs with small replicate counts.
    bool force_direct = false;
};

// Replicated draws of the statistic under both hypotheses.
struct SampleSet {
    StatKind kind = StatKind::f_2d;
    std::vector<double> null_scalar, alt_scalar; // 1D statistics
    std::vector<Vec2> null_vec, alt_vec;         // 2D statistic
    Vec2 h{0.0, 0.0}; // deterministic response; scalar kinds use h.x
    std::uint64_t seed = 0;
    std::string spec_digest;
};

// Runs the experiment: builds the influence weights once, then evaluates
// every replicate as a weighted sum over a fresh noise plane. Alternative
// samples are the null mechanism shifted by the deterministic response
// (exact by linearity) unless independent draws are requested.
SampleSet run_replicates(const ExperimentSpec& spec);

// Moment summary of one statistic component.
struct MomentSummary {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double ex_kurtosis = 0.0;
};

// Normality diagnostics of a sample with Monte Carlo standard errors for
// the shape statistics (sqrt(6/n) and sqrt(24/n)).
struct GaussianityReport {
    int n = 0;
    bool vector_valued = false;
    MomentSummary comp[2];
    double cross_cov = 0.0;
    double skew_se = 0.0;
    double kurt_se = 0.0;
};

GaussianityReport gaussianity_report(const std::vector<double>& samples);
GaussianityReport gaussianity_report(const std::vector<Vec2>& samples);

// Receiver operating characteristic: false/true positive rates as the
// decision threshold sweeps the pooled statistic values, and the area
// under the curve (ties credited one half).
struct RocCurve {
    std::vector<double> fpr, tpr;
    double auc = 0.0;
};

RocCurve empirical_roc(const std::vector<double>& null_stats,
                       const std::vector<double>& alt_stats);

// Scalar decision statistics of a sample set: |F_u| for the 1D kinds,
// the quadratic form F' C^{-1} F (or |F| when C is null) for the 2D kind.
std::pair<std::vector<double>, std::vector<double>> decision_stats(
    const SampleSet& samples, const SymMat2* c = nullptr);

// Theoretical ROC: detection power against test size on a log-spaced
// alpha grid. response = |H_u| or |H|; dispersion = gamma or nu.
RocCurve theoretical_roc(double response, double dispersion, StatKind kind,
                         int n_alpha = 1000);

// Theoretical power of the 1D(linear) and 2D statistics across noise
// levels, for the edge configured in the spec.
struct PowerTable {
    double alpha = 0.05;
    std::vector<double> sigma, power_1d, power_2d;
};

PowerTable power_vs_sigma(const ExperimentSpec& spec,
                          const std::vector<double>& sigmas, double alpha);

// Histogram with explicit bin edges (size counts + 1).
struct Histogram {
    std::vector<double> edges;
    std::vector<int> counts;
};

// Freedman-Diaconis bin width by default; a positive `bins` forces the
// bin count.
Histogram histogram(const std::vector<double>& samples, int bins = 0);

void write_histogram_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, Histogram>>& arms);
void write_roc_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, const RocCurve*>>& curves);
void write_power_csv(const std::string& path, const PowerTable& table);
void write_gaussianity_csv(const std::string& path,
                           const GaussianityReport& report);

// 64-bit FNV-1a digest of a canonical serialization of the spec; stored
// in SampleSet provenance and artifact headers.
std::string experiment_digest(const ExperimentSpec& spec);

} // namespace ctedge
