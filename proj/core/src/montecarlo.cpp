#include "ctedge/montecarlo.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "ctedge/covariance.hpp"
#include "ctedge/errors.hpp"
#include "ctedge/parallel.hpp"
#include "ctedge/reconstructor.hpp"

namespace ctedge {

namespace {

double weight_value(StatKind kind, double t) {
    if (kind == StatKind::f_u_linear) return t;
    return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
}

// Sinogram-plane weights of the 1D segment statistic: the midpoint rule
// of f_u_1d with bilinear interpolation, pushed through the per-point
// reconstruction weights so a replicate is a single dot product.
std::vector<double> segment_plane(const ExperimentSpec& spec, const EdgePoint& edge) {
    const double rho = spec.rho;
    const double h = spec.segment_step;
    const int n_half = static_cast<int>(std::floor(rho / h + 1e-9));
    const int n = 2 * n_half + 1;
    int m = static_cast<int>(std::lround(2.0 * rho / h));
    if (m < 1) m = 1;
    const double step = 2.0 * rho / m;

    // Quadrature coefficient carried by each lattice node of the virtual
    // patch around the edge point.
    std::vector<double> coeff(static_cast<std::size_t>(n) * n, 0.0);
    const Vec2 dir = edge.theta0 / edge.theta0.norm();
    for (int i = 0; i < m; ++i) {
        const double t = -rho + (i + 0.5) * step;
        const double u = weight_value(spec.kind, t) * step;
        const double fx = t * dir.x / h + n_half;
        const double fy = t * dir.y / h + n_half;
        const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, n - 2);
        const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, n - 2);
        const double wx = fx - ix;
        const double wy = fy - iy;
        coeff[static_cast<std::size_t>(iy) * n + ix] += u * (1.0 - wx) * (1.0 - wy);
        coeff[static_cast<std::size_t>(iy) * n + ix + 1] += u * wx * (1.0 - wy);
        coeff[static_cast<std::size_t>(iy + 1) * n + ix] += u * (1.0 - wx) * wy;
        coeff[static_cast<std::size_t>(iy + 1) * n + ix + 1] += u * wx * wy;
    }

    std::vector<double> plane(spec.grid.size(), 0.0);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double c = coeff[static_cast<std::size_t>(iy) * n + ix];
            if (c == 0.0) continue;
            const Vec2 x = edge.x0 + spec.grid.epsilon *
                                         Vec2{(ix - n_half) * h, (iy - n_half) * h};
            const std::vector<double> pw =
                fbp_point_weights(spec.grid, spec.kernel, x);
            for (std::size_t i = 0; i < plane.size(); ++i) plane[i] += c * pw[i];
        }
    }
    return plane;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

MomentSummary moments(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    MomentSummary m;
    for (double x : v) m.mean += x;
    m.mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m.variance = m2 / (n - 1.0);
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double s = std::sqrt(m2);
    m.skewness = m3 / (s * s * s);
    m.ex_kurtosis = m4 / (m2 * m2) - 3.0;
    return m;
}

FILE* open_csv(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

} // namespace

std::string experiment_digest(const ExperimentSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    for (const Disk& d : spec.phantom.disks())
        os << "disk " << d.center.x << ' ' << d.center.y << ' ' << d.radius << ' '
           << d.amplitude << '\n';
    os << "edge " << spec.boundary_index << ' ' << spec.boundary_angle << '\n';
    os << "grid " << spec.grid.epsilon << ' ' << spec.grid.kappa << ' '
       << spec.grid.p_bar << ' ' << spec.grid.P << '\n';
    os << "noise " << static_cast<int>(spec.noise.family) << ' ' << spec.noise.raw_std;
    // The sigma field is a function; sample it at fixed probe points.
    for (double a : {0.0, 1.0, 2.5})
        os << ' ' << spec.noise.sigma(a, 0.3 * a - 0.2);
    os << '\n';
    os << "kernel " << spec.kernel.name() << ' ' << spec.kernel.hilbert_truncation()
       << '\n';
    os << "stat " << static_cast<int>(spec.kind) << ' ' << spec.rho << ' '
       << spec.quadrature_step << ' ' << spec.segment_step << '\n';
    os << "reps " << spec.n_null << ' ' << spec.n_alt << ' ' << spec.independent_alt
       << '\n';
    if (spec.force_direct) os << "direct 1\n";
    const std::string s = os.str();
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : s) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
    return std::string(buf);
}

SampleSet run_replicates(const ExperimentSpec& spec) {
    if (spec.n_null < 100 || spec.n_alt < 100)
        throw PreconditionError("replicate counts must be at least 100");
    const EdgePoint edge =
        spec.phantom.boundary_point(spec.boundary_index, spec.boundary_angle);
    const Sinogram det = sample_radon(spec.phantom, spec.grid);

    SampleSet out;
    out.kind = spec.kind;
    out.seed = spec.seed;
    out.spec_digest = experiment_digest(spec);

    const auto alt_index = [&](int r) {
        return static_cast<std::uint64_t>(spec.independent_alt ? spec.n_null + r : r);
    };

    if (spec.force_direct) {
        const double h = spec.kind == StatKind::f_2d
                             ? (spec.quadrature_step > 0.0 ? spec.quadrature_step
                                                           : spec.rho / 64.0)
                             : spec.segment_step;
        const auto evaluate = [&](const Sinogram& sino, LocalPatch::Part part) -> Vec2 {
            const LocalPatch patch =
                fbp_patch(sino, spec.kernel, edge.x0, spec.rho, h, part);
            if (spec.kind == StatKind::f_2d) return f_2d(patch, spec.rho);
            const Weight1d w =
                spec.kind == StatKind::f_u_linear ? Weight1d::linear : Weight1d::sign;
            return {f_u_1d(patch, edge.theta0, w, spec.rho), 0.0};
        };
        out.h = evaluate(det, LocalPatch::Part::deterministic);
        std::vector<Vec2> nulls(spec.n_null), alts(spec.n_alt);
        parallel_for(spec.n_null, [&](int r) {
            const Sinogram noise{spec.grid,
                                 draw_noise(spec.grid, spec.noise, spec.seed,
                                            static_cast<std::uint64_t>(r))};
            nulls[r] = evaluate(noise, LocalPatch::Part::noise_only);
        });
        parallel_for(spec.n_alt, [&](int r) {
            const Sinogram data = add_noise(
                det, draw_noise(spec.grid, spec.noise, spec.seed, alt_index(r)));
            alts[r] = evaluate(data, LocalPatch::Part::full);
        });
        if (spec.kind == StatKind::f_2d) {
            out.null_vec = std::move(nulls);
            out.alt_vec = std::move(alts);
        } else {
            out.null_scalar.resize(spec.n_null);
            out.alt_scalar.resize(spec.n_alt);
            for (int r = 0; r < spec.n_null; ++r) out.null_scalar[r] = nulls[r].x;
            for (int r = 0; r < spec.n_alt; ++r) out.alt_scalar[r] = alts[r].x;
        }
        return out;
    }

    if (spec.kind == StatKind::f_2d) {
        const InfluenceWeights w = influence_weights(
            spec.grid, spec.kernel, edge.x0, spec.rho, spec.quadrature_step);
        out.h = w.apply(det);
        out.null_vec.resize(spec.n_null);
        parallel_for(spec.n_null, [&](int r) {
            out.null_vec[r] = w.apply(draw_noise(spec.grid, spec.noise, spec.seed, r));
        });
        out.alt_vec.resize(spec.n_alt);
        parallel_for(spec.n_alt, [&](int r) {
            const Vec2 base = (!spec.independent_alt && r < spec.n_null)
                                  ? out.null_vec[r]
                                  : w.apply(draw_noise(spec.grid, spec.noise,
                                                       spec.seed, alt_index(r)));
            out.alt_vec[r] = base + out.h;
        });
    } else {
        const std::vector<double> plane = segment_plane(spec, edge);
        out.h = {dot(plane, det.values), 0.0};
        out.null_scalar.resize(spec.n_null);
        parallel_for(spec.n_null, [&](int r) {
            out.null_scalar[r] =
                dot(plane, draw_noise(spec.grid, spec.noise, spec.seed, r));
        });
        out.alt_scalar.resize(spec.n_alt);
        parallel_for(spec.n_alt, [&](int r) {
            const double base =
                (!spec.independent_alt && r < spec.n_null)
                    ? out.null_scalar[r]
                    : dot(plane, draw_noise(spec.grid, spec.noise, spec.seed,
                                            alt_index(r)));
            out.alt_scalar[r] = base + out.h.x;
        });
    }
    return out;
}

GaussianityReport gaussianity_report(const std::vector<double>& samples) {
    if (samples.size() < 1000)
        throw PreconditionError("gaussianity report needs at least 1000 samples");
    GaussianityReport r;
    r.n = static_cast<int>(samples.size());
    r.vector_valued = false;
    r.comp[0] = moments(samples);
    r.skew_se = std::sqrt(6.0 / r.n);
    r.kurt_se = std::sqrt(24.0 / r.n);
    return r;
}

GaussianityReport gaussianity_report(const std::vector<Vec2>& samples) {
    if (samples.size() < 1000)
        throw PreconditionError("gaussianity report needs at least 1000 samples");
    GaussianityReport r;
    r.n = static_cast<int>(samples.size());
    r.vector_valued = true;
    std::vector<double> x(samples.size()), y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        x[i] = samples[i].x;
        y[i] = samples[i].y;
    }
    r.comp[0] = moments(x);
    r.comp[1] = moments(y);
    double cc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        cc += (x[i] - r.comp[0].mean) * (y[i] - r.comp[1].mean);
    r.cross_cov = cc / (r.n - 1.0);
    r.skew_se = std::sqrt(6.0 / r.n);
    r.kurt_se = std::sqrt(24.0 / r.n);
    return r;
}

RocCurve empirical_roc(const std::vector<double>& null_stats,
                       const std::vector<double>& alt_stats) {
    if (null_stats.empty() || alt_stats.empty())
        throw PreconditionError("empirical_roc needs samples in both arms");
    // Pooled values, tagged by arm, descending; at each distinct value the
    // threshold passes a block and both rates advance together, which
    // yields a diagonal segment (half credit) at ties.
    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(null_stats.size() + alt_stats.size());
    for (double v : null_stats) pooled.emplace_back(v, 0);
    for (double v : alt_stats) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    RocCurve roc;
    roc.fpr.push_back(0.0);
    roc.tpr.push_back(0.0);
    const double n0 = static_cast<double>(null_stats.size());
    const double n1 = static_cast<double>(alt_stats.size());
    std::size_t i = 0;
    int fp = 0, tp = 0;
    while (i < pooled.size()) {
        const double v = pooled[i].first;
        while (i < pooled.size() && pooled[i].first == v) {
            if (pooled[i].second == 0)
                ++fp;
            else
                ++tp;
            ++i;
        }
        roc.fpr.push_back(fp / n0);
        roc.tpr.push_back(tp / n1);
    }
    double auc = 0.0;
    for (std::size_t k = 1; k < roc.fpr.size(); ++k)
        auc += (roc.fpr[k] - roc.fpr[k - 1]) * 0.5 * (roc.tpr[k] + roc.tpr[k - 1]);
    roc.auc = auc;
    return roc;
}

std::pair<std::vector<double>, std::vector<double>> decision_stats(
    const SampleSet& samples, const SymMat2* c) {
    std::vector<double> null_stats, alt_stats;
    if (samples.kind == StatKind::f_2d) {
        const SymMat2 inv = c ? c->inverse() : SymMat2::identity(1.0);
        auto stat = [&](Vec2 f) { return c ? inv.quad_form(f) : f.norm(); };
        null_stats.reserve(samples.null_vec.size());
        alt_stats.reserve(samples.alt_vec.size());
        for (Vec2 f : samples.null_vec) null_stats.push_back(stat(f));
        for (Vec2 f : samples.alt_vec) alt_stats.push_back(stat(f));
    } else {
        null_stats.reserve(samples.null_scalar.size());
        alt_stats.reserve(samples.alt_scalar.size());
        for (double f : samples.null_scalar) null_stats.push_back(std::abs(f));
        for (double f : samples.alt_scalar) alt_stats.push_back(std::abs(f));
    }
    return {std::move(null_stats), std::move(alt_stats)};
}

RocCurve theoretical_roc(double response, double dispersion, StatKind kind,
                         int n_alpha) {
    if (!(dispersion > 0.0)) throw PreconditionError("dispersion must be positive");
    if (n_alpha < 2) throw PreconditionError("alpha grid needs at least two points");
    RocCurve roc;
    roc.fpr.push_back(0.0);
    roc.tpr.push_back(0.0);
    for (int i = 0; i < n_alpha; ++i) {
        // Log-spaced sizes from 1e-6 up to (but excluding) 1.
        const double a = std::pow(10.0, -6.0 * (1.0 - static_cast<double>(i) / n_alpha));
        const double power = (kind == StatKind::f_2d)
                                 ? power_2d_iso({response, 0.0}, dispersion, a)
                                 : 1.0 - beta_1d(response, dispersion, a);
        roc.fpr.push_back(a);
        roc.tpr.push_back(power);
    }
    roc.fpr.push_back(1.0);
    roc.tpr.push_back(1.0);
    double auc = 0.0;
    for (std::size_t k = 1; k < roc.fpr.size(); ++k)
        auc += (roc.fpr[k] - roc.fpr[k - 1]) * 0.5 * (roc.tpr[k] + roc.tpr[k - 1]);
    roc.auc = auc;
    return roc;
}

PowerTable power_vs_sigma(const ExperimentSpec& spec,
                          const std::vector<double>& sigmas, double alpha) {
    const EdgePoint edge =
        spec.phantom.boundary_point(spec.boundary_index, spec.boundary_angle);
    // Dispersions scale linearly in sigma for a constant noise level, so
    // one unit-noise covariance evaluation serves the whole grid.
    const NoiseModel unit = NoiseModel::constant(1.0, spec.noise.family);
    const CovContext ctx(spec.kernel, unit, spec.grid, edge.x0);
    const double gamma1 =
        std::sqrt(gamma_sq(ctx, WeightFn::linear(), spec.rho, edge.theta0.angle()));
    const double nu1 = std::sqrt(nu_sq(ctx, spec.rho));
    const double h_lin = h_u_1d(spec.kernel, Weight1d::linear, spec.rho, edge.delta_f);
    const Vec2 h_2d = edge_vector(spec.kernel, spec.rho, edge.delta_f, edge.theta0).h;

    PowerTable t;
    t.alpha = alpha;
    for (double s : sigmas) {
        if (!(s > 0.0)) throw PreconditionError("sigma grid must be positive");
        t.sigma.push_back(s);
        t.power_1d.push_back(1.0 - beta_1d(h_lin, s * gamma1, alpha));
        t.power_2d.push_back(power_2d_iso(h_2d, s * nu1, alpha));
    }
    return t;
}

Histogram histogram(const std::vector<double>& samples, int bins) {
    if (samples.empty()) throw PreconditionError("histogram needs samples");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front(), hi = sorted.back();
    int n_bins = bins;
    if (n_bins <= 0) {
        const double q1 = sorted[sorted.size() / 4];
        const double q3 = sorted[(3 * sorted.size()) / 4];
        const double width =
            2.0 * (q3 - q1) / std::cbrt(static_cast<double>(sorted.size()));
        n_bins = (width > 0.0 && hi > lo)
                     ? std::max(1, static_cast<int>(std::ceil((hi - lo) / width)))
                     : 1;
        n_bins = std::min(n_bins, 10000);
    }
    Histogram h;
    h.counts.assign(n_bins, 0);
    h.edges.resize(n_bins + 1);
    const double span = (hi > lo) ? (hi - lo) : 1.0;
    for (int i = 0; i <= n_bins; ++i)
        h.edges[i] = lo + span * static_cast<double>(i) / n_bins;
    for (double v : samples) {
        int b = static_cast<int>((v - lo) / span * n_bins);
        b = std::clamp(b, 0, n_bins - 1);
        ++h.counts[b];
    }
    return h;
}

void write_histogram_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, Histogram>>& arms) {
    FILE* f = open_csv(path);
    std::fprintf(f, "bin_lo,bin_hi,count,arm\n");
    for (const auto& [name, h] : arms)
        for (std::size_t i = 0; i < h.counts.size(); ++i)
            std::fprintf(f, "%.17g,%.17g,%d,%s\n", h.edges[i], h.edges[i + 1],
                         h.counts[i], name.c_str());
    std::fclose(f);
}

void write_roc_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, const RocCurve*>>& curves) {
    FILE* f = open_csv(path);
    std::fprintf(f, "alpha,tpr,source\n");
    for (const auto& [name, roc] : curves)
        for (std::size_t i = 0; i < roc->fpr.size(); ++i)
            std::fprintf(f, "%.17g,%.17g,%s\n", roc->fpr[i], roc->tpr[i],
                         name.c_str());
    std::fclose(f);
}

void write_power_csv(const std::string& path, const PowerTable& table) {
    FILE* f = open_csv(path);
    std::fprintf(f, "sigma,power_1d,power_2d,alpha\n");
    for (std::size_t i = 0; i < table.sigma.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", table.sigma[i],
                     table.power_1d[i], table.power_2d[i], table.alpha);
    std::fclose(f);
}

void write_gaussianity_csv(const std::string& path,
                           const GaussianityReport& report) {
    FILE* f = open_csv(path);
    std::fprintf(f, "component,mean,variance,skewness,ex_kurtosis,skew_se,kurt_se\n");
    const int n_comp = report.vector_valued ? 2 : 1;
    for (int c = 0; c < n_comp; ++c)
        std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", c,
                     report.comp[c].mean, report.comp[c].variance,
                     report.comp[c].skewness, report.comp[c].ex_kurtosis,
                     report.skew_se, report.kurt_se);
    if (report.vector_valued)
        std::fprintf(f, "cross,%.17g,,,,,\n", report.cross_cov);
    std::fclose(f);
}

} // namespace ctedge
