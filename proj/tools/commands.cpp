#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "ctedge/covariance.hpp"
#include "ctedge/errors.hpp"
#include "ctedge/inference.hpp"
#include "ctedge/montecarlo.hpp"
#include "ctedge/phantom.hpp"
#include "ctedge/reconstructor.hpp"
#include "ctedge/sampling.hpp"
#include "ctedge/scanmap.hpp"

namespace ctedge::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string art(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

std::string provenance_line(const RunConfig& cfg) {
    return "# config=" + cfg.hash() + " seed=" + std::to_string(cfg.seed) + "\n";
}

// Prepends the provenance comment to a text artifact written by a library
// routine.
void stamp_text(const std::string& path, const RunConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot reopen artifact for stamping: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << provenance_line(cfg) << buf.str();
    if (!out) throw IoError("cannot rewrite artifact: " + path);
}

// Inserts the provenance comment after the PGM magic line (a legal PGM
// comment) and adds the hash to the geometry sidecar.
void stamp_pgm(const std::string& path, const RunConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot reopen artifact for stamping: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    in.close();
    const std::string bytes = buf.str();
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw IoError("malformed PGM: " + path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes.substr(0, nl + 1) << provenance_line(cfg)
        << bytes.substr(nl + 1);
    if (!out) throw IoError("cannot rewrite artifact: " + path);

    const std::string sidecar = path + ".json";
    std::ifstream sc(sidecar);
    if (sc) {
        json j = json::parse(sc, nullptr, true);
        sc.close();
        j["config_hash"] = cfg.hash();
        j["seed"] = cfg.seed;
        std::ofstream sout(sidecar, std::ios::trunc);
        sout << j.dump(2) << '\n';
    }
}

// Binary artifacts carry provenance in a sibling JSON file.
void write_sidecar(const std::string& path, const RunConfig& cfg) {
    json j;
    j["config_hash"] = cfg.hash();
    j["seed"] = cfg.seed;
    std::ofstream out(path + ".json", std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("cannot write sidecar: " + path + ".json");
}

json base_summary(const RunConfig& cfg, const std::string& command) {
    json j;
    j["command"] = command;
    j["config_hash"] = cfg.hash();
    j["seed"] = cfg.seed;
    j["config"] = cfg.to_json();
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("cannot write artifact: " + path);
}

FILE* open_csv(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double normal_pdf(double t, double mean, double sd) {
    const double z = (t - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

WeightFn weight_fn_of(Weight1d k) {
    return k == Weight1d::linear ? WeightFn::linear() : WeightFn::sign();
}

json sym_mat_json(const SymMat2& m) {
    return json{{"c11", m.a}, {"c12", m.b}, {"c22", m.c}};
}

json admissibility_json(const AdmissibilityReport& r) {
    return json{{"value_norm", r.value_norm},
                {"rational_gap_norm", r.rational_gap_norm},
                {"value_perp", r.value_perp},
                {"rational_gap_perp", r.rational_gap_perp},
                {"curvature_nonzero", r.curvature_nonzero},
                {"inside_support", r.inside_support},
                {"sigma_positive", r.sigma_positive},
                {"verdict", r.verdict}};
}

// Sinogram of the configured scene plus one reproducible noise draw.
Sinogram noisy_draw(const RunConfig& cfg, const Sinogram& det,
                    std::uint64_t replicate = 0) {
    return add_noise(det,
                     draw_noise(cfg.grid(), cfg.noise(), cfg.seed, replicate));
}

void write_patch_csv(const LocalPatch& patch, const std::string& path) {
    FILE* f = open_csv(path);
    std::fprintf(f, "xcheck,ycheck,value\n");
    for (int iy = 0; iy < patch.n; ++iy)
        for (int ix = 0; ix < patch.n; ++ix)
            std::fprintf(f, "%.12g,%.12g,%.12g\n", patch.coord(ix),
                         patch.coord(iy), patch.at(ix, iy));
    std::fclose(f);
}

// Monotone-bisection inverse of a coverage function on [lo, hi].
double invert_coverage(const std::function<double(double)>& coverage, double lo,
                       double hi, double level) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (coverage(mid) < level) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Rejection fraction of scalar decision statistics above a threshold.
double rejection_rate(const std::vector<double>& stats, double threshold) {
    std::size_t n = 0;
    for (double s : stats)
        if (s > threshold) ++n;
    return static_cast<double>(n) / static_cast<double>(stats.size());
}

} // namespace

RunConfig resolve(const CommonFlags& flags) {
    RunConfig cfg = flags.config_path.empty() ? RunConfig{}
                                              : load_config(flags.config_path);
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.seed_set) cfg.seed = flags.seed;
    if (flags.force_direct) cfg.mc_force_direct = true;
    return cfg;
}

int cmd_simulate(const RunConfig& cfg) {
    const SamplingGrid grid = cfg.grid();
    const Sinogram det = sample_radon(cfg.phantom(), grid);
    const std::vector<double> noise = draw_noise(grid, cfg.noise(), cfg.seed, 0);
    const Sinogram noisy = add_noise(det, noise);

    write_sma(det, art(cfg, "sinogram.sma"));
    write_sidecar(art(cfg, "sinogram.sma"), cfg);
    write_sinogram_csv(det, art(cfg, "sinogram.csv"));
    stamp_text(art(cfg, "sinogram.csv"), cfg);
    write_sma(noisy, art(cfg, "noisy.sma"));
    write_sidecar(art(cfg, "noisy.sma"), cfg);
    write_sinogram_csv(noisy, art(cfg, "noisy.csv"));
    stamp_text(art(cfg, "noisy.csv"), cfg);

    json j = base_summary(cfg, "simulate");
    j["n_alpha"] = grid.n_alpha();
    j["n_p"] = grid.n_p();
    j["cells"] = grid.size();
    j["noise_to_signal"] = l2_norm(noise) / l2_norm(det.values);
    j["cell_std_at_origin"] = cfg.noise().std_dev(0.0, 0.0, grid);
    j["artifacts"] = {"sinogram.sma", "sinogram.csv", "noisy.sma", "noisy.csv"};
    write_json_file(art(cfg, "summary.json"), j);
    return 0;
}

int cmd_recon(const RunConfig& cfg) {
    const Kernel kernel = cfg.kernel();
    const Sinogram det = sample_radon(cfg.phantom(), cfg.grid());
    const Sinogram noisy = noisy_draw(cfg, det);
    json j = base_summary(cfg, "recon");

    if (cfg.recon_target == "image") {
        const BoundingBox bbox{cfg.image_x_min, cfg.image_x_max, cfg.image_y_min,
                               cfg.image_y_max};
        const ImageGrid image = fbp_image(noisy, kernel, bbox, cfg.image_step);
        write_image_csv(image, art(cfg, "image.csv"));
        stamp_text(art(cfg, "image.csv"), cfg);
        write_image_pgm(image, art(cfg, "image.pgm"));
        stamp_pgm(art(cfg, "image.pgm"), cfg);
        const auto [lo, hi] =
            std::minmax_element(image.values.begin(), image.values.end());
        j["nx"] = image.nx;
        j["ny"] = image.ny;
        j["value_min"] = *lo;
        j["value_max"] = *hi;
        j["artifacts"] = {"image.csv", "image.pgm", "image.pgm.json"};
    } else {
        const EdgePoint edge = cfg.edge();
        const LocalPatch patch =
            fbp_patch(noisy, kernel, edge.x0, cfg.rho, cfg.patch_h);
        write_patch_csv(patch, art(cfg, "patch.csv"));
        stamp_text(art(cfg, "patch.csv"), cfg);
        j["patch_n"] = patch.n;
        j["x0"] = {edge.x0.x, edge.x0.y};
        j["artifacts"] = {"patch.csv"};
    }
    write_json_file(art(cfg, "summary.json"), j);
    return 0;
}

int cmd_cov_report(const RunConfig& cfg) {
    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const CovContext ctx(kernel, cfg.test_noise(), cfg.grid(), edge.x0);
    const double theta_angle = edge.theta0.angle();

    const double c0 = cov_C(ctx, {0.0, 0.0});
    const double nu2 = nu_sq(ctx, cfg.rho);
    const SymMat2 chat = cov_matrix(ctx, cfg.rho);
    const double g_lin = gamma_sq(ctx, WeightFn::linear(), cfg.rho, theta_angle);
    const double g_sgn = gamma_sq(ctx, WeightFn::sign(), cfg.rho, theta_angle);
    const EdgeVector ev = edge_vector(kernel, cfg.rho, edge.delta_f, edge.theta0);
    const double h_lin = h_u_1d(kernel, Weight1d::linear, cfg.rho, edge.delta_f);
    const double h_sgn = h_u_1d(kernel, Weight1d::sign, cfg.rho, edge.delta_f);

    json j = base_summary(cfg, "cov-report");
    j["x0"] = {edge.x0.x, edge.x0.y};
    j["theta0"] = {edge.theta0.x, edge.theta0.y};
    j["delta_f"] = edge.delta_f;
    j["C0"] = c0;
    j["nu_sq"] = nu2;
    j["cov"] = sym_mat_json(chat);
    j["gamma_sq_linear"] = g_lin;
    j["gamma_sq_sign"] = g_sgn;
    j["H"] = {ev.h.x, ev.h.y};
    j["magnitude_coeff"] = ev.magnitude_coeff;
    j["h_linear"] = h_lin;
    j["h_sign"] = h_sgn;
    j["noncentrality"] = chat.inverse().quad_form(ev.h);
    j["m_linear"] = std::abs(h_lin) / std::sqrt(g_lin);
    j["m_sign"] = std::abs(h_sgn) / std::sqrt(g_sgn);
    j["m_2d"] = ev.h.norm() / std::sqrt(nu2);
    const bool sigma_pos = cfg.test_sigma > 0.0 || cfg.noise_sigma > 0.0;
    j["admissibility"] = admissibility_json(admissibility_report(
        edge.x0, edge.theta0, cfg.grid_kappa, cfg.phantom(), sigma_pos));

    {
        FILE* f = open_csv(art(cfg, "cov_grid.csv"));
        std::fprintf(f, "xcheck1,xcheck2,C\n");
        const int n = 65;
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const Vec2 xc{-cfg.rho + 2.0 * cfg.rho * ix / (n - 1),
                              -cfg.rho + 2.0 * cfg.rho * iy / (n - 1)};
                std::fprintf(f, "%.12g,%.12g,%.12g\n", xc.x, xc.y, cov_C(ctx, xc));
            }
        }
        std::fclose(f);
        stamp_text(art(cfg, "cov_grid.csv"), cfg);
    }
    {
        FILE* f = open_csv(art(cfg, "cov_radial.csv"));
        std::fprintf(f, "t,C_along,C_perp\n");
        const int n = 201;
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * cfg.rho * i / (n - 1);
            std::fprintf(f, "%.12g,%.12g,%.12g\n", t, cov_C1(ctx, t, theta_angle),
                         cov_C1(ctx, t, theta_angle + M_PI / 2.0));
        }
        std::fclose(f);
        stamp_text(art(cfg, "cov_radial.csv"), cfg);
    }

    j["artifacts"] = {"cov_grid.csv", "cov_radial.csv"};
    write_json_file(art(cfg, "cov_report.json"), j);
    return 0;
}

int cmd_test1d(const RunConfig& cfg) {
    const Weight1d kind = cfg.weight_1d();
    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const Sinogram det = sample_radon(cfg.phantom(), cfg.grid());
    const LocalPatch patch =
        fbp_patch(noisy_draw(cfg, det), kernel, edge.x0, cfg.rho, cfg.patch_h);

    const double f_u = f_u_1d(patch, edge.theta0, kind, cfg.rho);
    const CovContext ctx(kernel, cfg.test_noise(), cfg.grid(), edge.x0);
    const double gamma =
        std::sqrt(gamma_sq(ctx, weight_fn_of(kind), cfg.rho, edge.theta0.angle()));
    const TestResult res = test_1d(f_u, gamma, cfg.alpha);
    const double h_u = h_u_1d(kernel, kind, cfg.rho, edge.delta_f);

    json j = base_summary(cfg, "test1d");
    j["f_u"] = f_u;
    j["gamma"] = gamma;
    j["statistic"] = res.statistic;
    j["threshold"] = res.threshold;
    j["reject"] = res.reject;
    j["p_value"] = res.p_value;
    j["h_u_theory"] = h_u;
    j["m"] = std::abs(h_u) / gamma;
    j["power_theory"] = 1.0 - beta_1d(h_u, gamma, cfg.alpha);
    write_json_file(art(cfg, "test1d.json"), j);
    return 0;
}

int cmd_test2d(const RunConfig& cfg) {
    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const SamplingGrid grid = cfg.grid();
    const Sinogram det = sample_radon(cfg.phantom(), grid);
    const InfluenceWeights w =
        influence_weights(grid, kernel, edge.x0, cfg.rho, cfg.mc_quadrature_step);

    const Vec2 f_obs = w.apply(noisy_draw(cfg, det));
    const Vec2 f_det = w.apply(det);
    const CovContext ctx(kernel, cfg.test_noise(), grid, edge.x0);
    const SymMat2 chat = cov_matrix(ctx, cfg.rho);
    const TestResult res = test_2d(f_obs, chat, cfg.alpha);
    const EdgeVector ev = edge_vector(kernel, cfg.rho, edge.delta_f, edge.theta0);

    json j = base_summary(cfg, "test2d");
    j["f"] = {f_obs.x, f_obs.y};
    j["f_deterministic"] = {f_det.x, f_det.y};
    j["cov"] = sym_mat_json(chat);
    j["nu_sq"] = nu_sq(ctx, cfg.rho);
    j["statistic"] = res.statistic;
    j["threshold"] = res.threshold;
    j["reject"] = res.reject;
    j["p_value"] = res.p_value;
    j["noncentrality_observed"] = chat.inverse().quad_form(f_det);
    j["noncentrality_theory"] = chat.inverse().quad_form(ev.h);
    j["H_theory"] = {ev.h.x, ev.h.y};
    j["power_theory"] = power_2d(ev.h, chat, cfg.alpha);
    const bool sigma_pos = cfg.test_sigma > 0.0 || cfg.noise_sigma > 0.0;
    j["admissibility"] = admissibility_json(admissibility_report(
        edge.x0, edge.theta0, cfg.grid_kappa, cfg.phantom(), sigma_pos));
    write_json_file(art(cfg, "test2d.json"), j);
    return 0;
}

int cmd_roc(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentSpec spec = cfg.experiment();
    const SampleSet samples = run_replicates(spec);

    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const CovContext ctx(kernel, cfg.test_noise(), cfg.grid(), edge.x0);

    SymMat2 chat;
    const SymMat2* chat_ptr = nullptr;
    Vec2 h_theory{0.0, 0.0};
    double response = 0.0, dispersion = 0.0;
    if (spec.kind == StatKind::f_2d) {
        chat = cov_matrix(ctx, cfg.rho);
        chat_ptr = &chat;
        h_theory = edge_vector(kernel, cfg.rho, edge.delta_f, edge.theta0).h;
        response = h_theory.norm();
        dispersion = std::sqrt(nu_sq(ctx, cfg.rho));
    } else {
        const Weight1d kind = cfg.weight_1d();
        response = h_u_1d(kernel, kind, cfg.rho, edge.delta_f);
        dispersion = std::sqrt(
            gamma_sq(ctx, weight_fn_of(kind), cfg.rho, edge.theta0.angle()));
    }

    const auto [null_stats, alt_stats] = decision_stats(samples, chat_ptr);
    const RocCurve emp = empirical_roc(null_stats, alt_stats);
    const RocCurve theo =
        theoretical_roc(std::abs(response), dispersion, spec.kind);

    write_histogram_csv(art(cfg, "hist.csv"), {{"null", histogram(null_stats)},
                                               {"alt", histogram(alt_stats)}});
    stamp_text(art(cfg, "hist.csv"), cfg);
    write_roc_csv(art(cfg, "roc.csv"),
                  {{"empirical", &emp}, {"theoretical", &theo}});
    stamp_text(art(cfg, "roc.csv"), cfg);
    const bool gauss_ok = spec.n_null >= 1000; // diagnostics need 1000 samples
    if (gauss_ok) {
        const GaussianityReport gauss =
            spec.kind == StatKind::f_2d ? gaussianity_report(samples.null_vec)
                                        : gaussianity_report(samples.null_scalar);
        write_gaussianity_csv(art(cfg, "gaussianity.csv"), gauss);
        stamp_text(art(cfg, "gaussianity.csv"), cfg);
    }

    json j = base_summary(cfg, "roc");
    j["digest"] = samples.spec_digest;
    j["h_observed"] = {samples.h.x, samples.h.y};
    j["response_theory"] = response;
    j["dispersion_theory"] = dispersion;
    j["m"] = std::abs(response) / dispersion;
    j["auc_empirical"] = emp.auc;
    j["auc_theoretical"] = theo.auc;
    if (spec.kind != StatKind::f_2d) {
        // One-sided operating characteristic of the sign-oriented detector.
        const double orient = response >= 0.0 ? 1.0 : -1.0;
        std::vector<double> sn = samples.null_scalar, sa = samples.alt_scalar;
        for (double& v : sn) v *= orient;
        for (double& v : sa) v *= orient;
        j["auc_signed_empirical"] = empirical_roc(sn, sa).auc;
        j["auc_signed_theory"] =
            normal_cdf(std::abs(response) / dispersion / std::sqrt(2.0));
    }
    // Size and power of the level-alpha test on these samples.
    double threshold;
    double power_theory;
    if (spec.kind == StatKind::f_2d) {
        threshold = -2.0 * std::log(cfg.alpha);
        power_theory = power_2d(h_theory, chat, cfg.alpha);
    } else {
        threshold = dispersion * std::sqrt(chi2_quantile_1(1.0 - cfg.alpha));
        power_theory = 1.0 - beta_1d(response, dispersion, cfg.alpha);
    }
    j["alpha"] = cfg.alpha;
    j["size_empirical"] = rejection_rate(null_stats, threshold);
    j["power_empirical"] = rejection_rate(alt_stats, threshold);
    j["power_theory"] = power_theory;
    j["runtime_seconds"] = elapsed_since(t0);
    j["artifacts"] = gauss_ok
                         ? json{"hist.csv", "roc.csv", "gaussianity.csv"}
                         : json{"hist.csv", "roc.csv"};
    write_json_file(art(cfg, "summary.json"), j);
    return 0;
}

int cmd_power_curve(const RunConfig& cfg) {
    if (cfg.sigma_grid.empty())
        throw ConfigError("power-curve needs a nonempty sigma_grid");
    const PowerTable table =
        power_vs_sigma(cfg.experiment(), cfg.sigma_grid, cfg.alpha);
    write_power_csv(art(cfg, "power_vs_sigma.csv"), table);
    stamp_text(art(cfg, "power_vs_sigma.csv"), cfg);

    json j = base_summary(cfg, "power-curve");
    j["alpha"] = table.alpha;
    j["n_sigma"] = table.sigma.size();
    j["artifacts"] = {"power_vs_sigma.csv"};
    write_json_file(art(cfg, "summary.json"), j);
    return 0;
}

namespace {

// Shared by uq-direction / uq-magnitude and the figure drivers: the edge
// response and isotropic dispersion of the configured test.
struct UqSetting {
    Vec2 h;
    double nu = 0.0;
};

UqSetting uq_setting(const RunConfig& cfg, const Kernel& kernel) {
    const EdgePoint edge = cfg.edge();
    const CovContext ctx(kernel, cfg.test_noise(), cfg.grid(), edge.x0);
    return {edge_vector(kernel, cfg.rho, edge.delta_f, edge.theta0).h,
            std::sqrt(nu_sq(ctx, cfg.rho))};
}

void write_polar_pdf_csv(const PolarPdf& pdf, const std::string& path,
                         const char* abscissa) {
    FILE* f = open_csv(path);
    std::fprintf(f, "%s,density\n", abscissa);
    for (std::size_t i = 0; i < pdf.grid.size(); ++i)
        std::fprintf(f, "%.12g,%.12g\n", pdf.grid[i], pdf.values[i]);
    std::fclose(f);
}

} // namespace

int cmd_uq_direction(const RunConfig& cfg) {
    const Kernel kernel = cfg.kernel();
    const UqSetting uq = uq_setting(cfg, kernel);

    write_polar_pdf_csv(tabulate_direction_pdf(uq.h, uq.nu),
                        art(cfg, "direction_pdf.csv"), "theta");
    stamp_text(art(cfg, "direction_pdf.csv"), cfg);

    FILE* f = open_csv(art(cfg, "direction_coverage.csv"));
    std::fprintf(f, "omega_deg,coverage\n");
    const int n = 361;
    for (int i = 0; i < n; ++i) {
        const double omega = M_PI * i / (n - 1);
        std::fprintf(f, "%.12g,%.12g\n", omega * 180.0 / M_PI,
                     direction_coverage(omega, uq.h, uq.nu));
    }
    std::fclose(f);
    stamp_text(art(cfg, "direction_coverage.csv"), cfg);

    const double omega_level = invert_coverage(
        [&](double w) { return direction_coverage(w, uq.h, uq.nu); }, 0.0, M_PI,
        cfg.uq_level);

    json j = base_summary(cfg, "uq-direction");
    j["H"] = {uq.h.x, uq.h.y};
    j["nu"] = uq.nu;
    j["m"] = uq.h.norm() / uq.nu;
    j["level"] = cfg.uq_level;
    j["omega_at_level_deg"] = omega_level * 180.0 / M_PI;
    j["artifacts"] = {"direction_pdf.csv", "direction_coverage.csv"};
    write_json_file(art(cfg, "summary.json"), j);
    return 0;
}

int cmd_uq_magnitude(const RunConfig& cfg) {
    const Kernel kernel = cfg.kernel();
    const UqSetting uq = uq_setting(cfg, kernel);
    const double h_mag = uq.h.norm();

    write_polar_pdf_csv(tabulate_magnitude_pdf(uq.h, uq.nu),
                        art(cfg, "magnitude_pdf.csv"), "t");
    stamp_text(art(cfg, "magnitude_pdf.csv"), cfg);

    const double r_max = 0.999 * h_mag;
    FILE* f = open_csv(art(cfg, "magnitude_coverage.csv"));
    std::fprintf(f, "r,coverage\n");
    const int n = 400;
    for (int i = 0; i < n; ++i) {
        const double r = r_max * (i + 1) / n;
        std::fprintf(f, "%.12g,%.12g\n", r, magnitude_coverage(r, uq.h, uq.nu));
    }
    std::fclose(f);
    stamp_text(art(cfg, "magnitude_coverage.csv"), cfg);

    json j = base_summary(cfg, "uq-magnitude");
    j["H"] = {uq.h.x, uq.h.y};
    j["h_mag"] = h_mag;
    j["nu"] = uq.nu;
    j["m"] = h_mag / uq.nu;
    j["level"] = cfg.uq_level;
    const double max_cov = magnitude_coverage(r_max, uq.h, uq.nu);
    j["max_coverage"] = max_cov;
    // The half-width r lives in [0, |H|); when the noise is too large the
    // requested level is not attainable and we report that honestly.
    if (max_cov >= cfg.uq_level) {
        j["attainable"] = true;
        j["r_at_level"] = invert_coverage(
            [&](double r) { return magnitude_coverage(r, uq.h, uq.nu); }, 0.0,
            r_max, cfg.uq_level);
    } else {
        j["attainable"] = false;
    }
    j["artifacts"] = {"magnitude_pdf.csv", "magnitude_coverage.csv"};
    write_json_file(art(cfg, "summary.json"), j);
    return 0;
}

namespace {

// Scan of one reconstructed image (noisy or deterministic); shared by
// cmd_scan and the figure driver. Writes <prefix>mag.csv/.pgm,
// <prefix>theta.csv, <prefix>quiver.csv and returns the map.
EdgeMap run_scan(const RunConfig& cfg, const Kernel& kernel,
                 const ImageGrid& image, const std::string& prefix,
                 json& summary) {
    ScanConfig sc;
    sc.rho = cfg.rho;
    sc.epsilon = cfg.grid_epsilon;
    sc.stride = cfg.scan_stride;
    sc.step_fraction = cfg.image_step / cfg.grid_epsilon;
    sc.policy.null_quantile = cfg.scan_quantile;
    sc.policy.relative_fraction = cfg.scan_fraction;

    const Vec2 center{0.5 * (cfg.image_x_min + cfg.image_x_max),
                      0.5 * (cfg.image_y_min + cfg.image_y_max)};
    const CovContext ctx(kernel, cfg.test_noise(), cfg.grid(), center);
    EdgeMap map = scan(image, sc, ctx);

    write_edgemap_mag_csv(map, art(cfg, prefix + "mag.csv"));
    stamp_text(art(cfg, prefix + "mag.csv"), cfg);
    write_edgemap_theta_csv(map, art(cfg, prefix + "theta.csv"));
    stamp_text(art(cfg, prefix + "theta.csv"), cfg);
    write_quiver_csv(map, art(cfg, prefix + "quiver.csv"));
    stamp_text(art(cfg, prefix + "quiver.csv"), cfg);
    write_edgemap_mag_pgm(map, art(cfg, prefix + "mag.pgm"));
    stamp_pgm(art(cfg, prefix + "mag.pgm"), cfg);

    std::size_t masked = 0;
    for (auto m : map.mask) masked += m;
    double max_mag = 0.0;
    for (double m : map.mag) max_mag = std::max(max_mag, m);
    summary[prefix + "centers"] = map.centers.size();
    summary[prefix + "masked"] = masked;
    summary[prefix + "max_mag"] = max_mag;
    summary[prefix + "nu_sq"] = map.nu_sq.empty() ? 0.0 : map.nu_sq.front();
    return map;
}

} // namespace

int cmd_scan(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const Kernel kernel = cfg.kernel();
    const SamplingGrid grid = cfg.grid();
    const Sinogram det = sample_radon(cfg.phantom(), grid);

    json j = base_summary(cfg, "scan");
    Sinogram sino = det;
    if (!cfg.scan_noiseless) {
        const std::vector<double> noise = draw_noise(grid, cfg.noise(), cfg.seed, 0);
        sino = add_noise(det, noise);
        j["noise_to_signal"] = l2_norm(noise) / l2_norm(det.values);
    }
    const BoundingBox bbox{cfg.image_x_min, cfg.image_x_max, cfg.image_y_min,
                           cfg.image_y_max};
    run_scan(cfg, kernel, fbp_image(sino, kernel, bbox, cfg.image_step), "", j);
    j["runtime_seconds"] = elapsed_since(t0);
    j["artifacts"] = {"mag.csv", "theta.csv", "quiver.csv", "mag.pgm",
                      "mag.pgm.json"};
    write_json_file(art(cfg, "summary.json"), j);
    return 0;
}

// ---------------------------------------------------------------------------
// Canned figure drivers.

namespace {

RunConfig figure_base(const CommonFlags& flags, const std::string& fig) {
    RunConfig cfg; // library defaults are the published configuration
    cfg.out_dir = (fs::path(flags.out_dir.empty() ? "out" : flags.out_dir) / fig)
                      .string();
    if (flags.seed_set) cfg.seed = flags.seed;
    if (flags.force_direct) cfg.mc_force_direct = true;
    return cfg;
}

void finish_figure(const RunConfig& cfg, json& j,
                   std::chrono::steady_clock::time_point t0,
                   const std::string& fig) {
    j["runtime_seconds"] = elapsed_since(t0);
    write_json_file(art(cfg, "summary.json"), j);
    std::printf("%s: artifacts in %s (%.1f s)\n", fig.c_str(),
                cfg.out_dir.c_str(), j["runtime_seconds"].get<double>());
}

// Deterministic local profile across the edge with the smoothed-edge
// prediction.
int repro_fig1(const CommonFlags& flags) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = figure_base(flags, "fig1");
    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const Sinogram det = sample_radon(cfg.phantom(), cfg.grid());

    const LocalPatch patch =
        fbp_patch(det, kernel, edge.x0, cfg.rho, cfg.patch_h,
                  LocalPatch::Part::deterministic);
    const DtbFit fit = dtb_residual(patch, edge.theta0, edge.delta_f, kernel);

    FILE* f = open_csv(art(cfg, "fig1_profile.csv"));
    std::fprintf(f, "t,observed,predicted\n");
    const Vec2 dir = unit_vector(edge.theta0.angle());
    const int n = 241;
    for (int i = 0; i < n; ++i) {
        const double t = -cfg.rho + 2.0 * cfg.rho * i / (n - 1);
        const Vec2 x = edge.x0 + cfg.grid_epsilon * t * dir;
        std::fprintf(f, "%.12g,%.12g,%.12g\n", t, fbp_value(det, kernel, x),
                     fit.c_fit + edge.delta_f * kernel.dtb(t));
    }
    std::fclose(f);
    stamp_text(art(cfg, "fig1_profile.csv"), cfg);

    json j = base_summary(cfg, "repro fig1");
    j["c_fit"] = fit.c_fit;
    j["max_residual"] = fit.max_residual;
    j["artifacts"] = {"fig1_profile.csv"};
    finish_figure(cfg, j, t0, "fig1");
    return 0;
}

// 1D statistic: replicate histograms, predicted densities, and ROC curves.
int repro_fig_1d(const CommonFlags& flags, const std::string& fig,
                 const std::string& statistic) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = figure_base(flags, fig);
    cfg.statistic = statistic;
    cfg.n_null = 1000;
    cfg.n_alt = 1000;

    const SampleSet samples = run_replicates(cfg.experiment());
    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const Weight1d kind = cfg.weight_1d();
    const CovContext ctx(kernel, cfg.test_noise(), cfg.grid(), edge.x0);
    const double gamma = std::sqrt(
        gamma_sq(ctx, weight_fn_of(kind), cfg.rho, edge.theta0.angle()));
    const double h_u = h_u_1d(kernel, kind, cfg.rho, edge.delta_f);

    write_histogram_csv(art(cfg, fig + "_hist.csv"),
                        {{"null", histogram(samples.null_scalar)},
                         {"alt", histogram(samples.alt_scalar)}});
    stamp_text(art(cfg, fig + "_hist.csv"), cfg);

    {
        FILE* f = open_csv(art(cfg, fig + "_pdf.csv"));
        std::fprintf(f, "t,null_pdf,alt_pdf\n");
        const double h_obs = samples.h.x;
        const double lo = std::min(0.0, h_obs) - 4.5 * gamma;
        const double hi = std::max(0.0, h_obs) + 4.5 * gamma;
        const int n = 401;
        for (int i = 0; i < n; ++i) {
            const double t = lo + (hi - lo) * i / (n - 1);
            std::fprintf(f, "%.12g,%.12g,%.12g\n", t, normal_pdf(t, 0.0, gamma),
                         normal_pdf(t, h_obs, gamma));
        }
        std::fclose(f);
        stamp_text(art(cfg, fig + "_pdf.csv"), cfg);
    }

    const auto [null_stats, alt_stats] = decision_stats(samples);
    const RocCurve emp = empirical_roc(null_stats, alt_stats);
    const RocCurve theo =
        theoretical_roc(std::abs(h_u), gamma, cfg.stat_kind());
    write_roc_csv(art(cfg, fig + "_roc.csv"),
                  {{"empirical", &emp}, {"theoretical", &theo}});
    stamp_text(art(cfg, fig + "_roc.csv"), cfg);

    json j = base_summary(cfg, "repro " + fig);
    j["gamma"] = gamma;
    j["h_u_theory"] = h_u;
    j["h_u_observed"] = samples.h.x;
    j["m"] = std::abs(h_u) / gamma;
    j["auc_empirical"] = emp.auc;
    j["auc_theoretical"] = theo.auc;
    j["power_theory_at_alpha"] = 1.0 - beta_1d(h_u, gamma, cfg.alpha);
    j["artifacts"] = {fig + "_hist.csv", fig + "_pdf.csv", fig + "_roc.csv"};
    finish_figure(cfg, j, t0, fig);
    return 0;
}

// Full-scale line profiles across the disk at increasing noise, with the
// operating characteristics of the linear detector at each level.
int repro_fig5(const CommonFlags& flags) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = figure_base(flags, "fig5");
    const std::vector<double> sigmas{0.87, 1.73, 5.2, 34.6};
    const Kernel kernel = cfg.kernel();
    const SamplingGrid grid = cfg.grid();
    const Sinogram det = sample_radon(cfg.phantom(), grid);
    const EdgePoint edge = cfg.edge();
    const double h_u = h_u_1d(kernel, Weight1d::linear, cfg.rho, edge.delta_f);

    FILE* f = open_csv(art(cfg, "fig5_profiles.csv"));
    std::fprintf(f, "sigma,x1,value\n");
    const double y_line = cfg.edge().x0.y;
    const int n = 401;
    json auc = json::array();
    for (std::size_t s = 0; s < sigmas.size(); ++s) {
        RunConfig level = cfg;
        level.noise_sigma = sigmas[s];
        const Sinogram noisy = add_noise(
            det, draw_noise(grid, level.noise(), cfg.seed, s));
        for (int i = 0; i < n; ++i) {
            const double x1 = -0.7 + 1.4 * i / (n - 1);
            std::fprintf(f, "%.12g,%.12g,%.12g\n", sigmas[s], x1,
                         fbp_value(noisy, kernel, {x1, y_line}));
        }
        const CovContext ctx(kernel, level.test_noise(), grid, edge.x0);
        const double gamma = std::sqrt(
            gamma_sq(ctx, WeightFn::linear(), cfg.rho, edge.theta0.angle()));
        const double m = std::abs(h_u) / gamma;
        auc.push_back({{"sigma", sigmas[s]},
                       {"m", m},
                       {"auc_signed", normal_cdf(m / std::sqrt(2.0))},
                       {"auc_two_sided",
                        theoretical_roc(std::abs(h_u), gamma,
                                        StatKind::f_u_linear)
                            .auc}});
    }
    std::fclose(f);
    stamp_text(art(cfg, "fig5_profiles.csv"), cfg);

    FILE* a = open_csv(art(cfg, "fig5_auc.csv"));
    std::fprintf(a, "sigma,m,auc_signed,auc_two_sided\n");
    for (const auto& row : auc)
        std::fprintf(a, "%.12g,%.12g,%.12g,%.12g\n",
                     row["sigma"].get<double>(), row["m"].get<double>(),
                     row["auc_signed"].get<double>(),
                     row["auc_two_sided"].get<double>());
    std::fclose(a);
    stamp_text(art(cfg, "fig5_auc.csv"), cfg);

    json j = base_summary(cfg, "repro fig5");
    j["auc_table"] = auc;
    j["artifacts"] = {"fig5_profiles.csv", "fig5_auc.csv"};
    finish_figure(cfg, j, t0, "fig5");
    return 0;
}

// Deterministic 2D patch: observed local reconstruction against the
// smoothed-edge prediction.
int repro_fig11(const CommonFlags& flags) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = figure_base(flags, "fig11");
    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const Sinogram det = sample_radon(cfg.phantom(), cfg.grid());

    const LocalPatch patch =
        fbp_patch(det, kernel, edge.x0, cfg.rho, cfg.patch_h,
                  LocalPatch::Part::deterministic);
    const DtbFit fit = dtb_residual(patch, edge.theta0, edge.delta_f, kernel);
    write_patch_csv(patch, art(cfg, "fig11_observed.csv"));
    stamp_text(art(cfg, "fig11_observed.csv"), cfg);

    LocalPatch predicted = patch;
    const Vec2 dir = unit_vector(edge.theta0.angle());
    for (int iy = 0; iy < patch.n; ++iy)
        for (int ix = 0; ix < patch.n; ++ix) {
            const double t = dir.x * patch.coord(ix) + dir.y * patch.coord(iy);
            predicted.samples[static_cast<std::size_t>(iy) * patch.n + ix] =
                fit.c_fit + edge.delta_f * kernel.dtb(t);
        }
    write_patch_csv(predicted, art(cfg, "fig11_predicted.csv"));
    stamp_text(art(cfg, "fig11_predicted.csv"), cfg);

    const InfluenceWeights w =
        influence_weights(cfg.grid(), kernel, edge.x0, cfg.rho,
                          cfg.mc_quadrature_step);
    const Vec2 h_obs = w.apply(det);
    const EdgeVector ev = edge_vector(kernel, cfg.rho, edge.delta_f, edge.theta0);

    json j = base_summary(cfg, "repro fig11");
    j["c_fit"] = fit.c_fit;
    j["max_residual"] = fit.max_residual;
    j["H_theory"] = {ev.h.x, ev.h.y};
    j["H_observed"] = {h_obs.x, h_obs.y};
    j["artifacts"] = {"fig11_observed.csv", "fig11_predicted.csv"};
    finish_figure(cfg, j, t0, "fig11");
    return 0;
}

// Replicated 2D statistic: the F clouds under both hypotheses with the
// predicted marginals (fig12) or histograms (fig13).
int repro_fig12_13(const CommonFlags& flags, const std::string& fig) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = figure_base(flags, fig);
    const SampleSet samples = run_replicates(cfg.experiment());
    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const CovContext ctx(kernel, cfg.test_noise(), cfg.grid(), edge.x0);
    const SymMat2 chat = cov_matrix(ctx, cfg.rho);
    const double nu = std::sqrt(nu_sq(ctx, cfg.rho));
    const EdgeVector ev = edge_vector(kernel, cfg.rho, edge.delta_f, edge.theta0);

    json j = base_summary(cfg, "repro " + fig);
    std::vector<std::string> artifacts;

    if (fig == "fig12") {
        const std::pair<const char*, const std::vector<Vec2>*> arms[] = {
            {"fig12_null.csv", &samples.null_vec},
            {"fig12_alt.csv", &samples.alt_vec}};
        for (const auto& [name, arm] : arms) {
            FILE* f = open_csv(art(cfg, name));
            std::fprintf(f, "f1,f2\n");
            for (const Vec2& v : *arm)
                std::fprintf(f, "%.12g,%.12g\n", v.x, v.y);
            std::fclose(f);
            stamp_text(art(cfg, name), cfg);
            artifacts.push_back(name);
        }
    } else {
        const auto component = [](const std::vector<Vec2>& v, bool second) {
            std::vector<double> out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                out[i] = second ? v[i].y : v[i].x;
            return out;
        };
        write_histogram_csv(
            art(cfg, "fig13_hist.csv"),
            {{"null_f1", histogram(component(samples.null_vec, false))},
             {"null_f2", histogram(component(samples.null_vec, true))},
             {"alt_f1", histogram(component(samples.alt_vec, false))},
             {"alt_f2", histogram(component(samples.alt_vec, true))}});
        stamp_text(art(cfg, "fig13_hist.csv"), cfg);
        artifacts.push_back("fig13_hist.csv");
    }

    // Predicted marginal along the edge-normal component.
    {
        const std::string name = fig + "_marginals.csv";
        FILE* f = open_csv(art(cfg, name));
        std::fprintf(f, "t,null_pdf,alt_pdf\n");
        const double h1 = samples.h.x;
        const double lo = std::min(0.0, h1) - 4.5 * nu;
        const double hi = std::max(0.0, h1) + 4.5 * nu;
        const int n = 401;
        for (int i = 0; i < n; ++i) {
            const double t = lo + (hi - lo) * i / (n - 1);
            std::fprintf(f, "%.12g,%.12g,%.12g\n", t, normal_pdf(t, 0.0, nu),
                         normal_pdf(t, h1, nu));
        }
        std::fclose(f);
        stamp_text(art(cfg, name), cfg);
        artifacts.push_back(name);
    }

    // Sample moments of the null cloud against the prediction.
    Vec2 mean{0.0, 0.0};
    for (const Vec2& v : samples.null_vec) mean = mean + v;
    mean = mean / static_cast<double>(samples.null_vec.size());
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    for (const Vec2& v : samples.null_vec) {
        const Vec2 d = v - mean;
        s11 += d.x * d.x;
        s12 += d.x * d.y;
        s22 += d.y * d.y;
    }
    const double denom = static_cast<double>(samples.null_vec.size()) - 1.0;
    j["digest"] = samples.spec_digest;
    j["H_theory"] = {ev.h.x, ev.h.y};
    j["H_observed"] = {samples.h.x, samples.h.y};
    j["null_mean"] = {mean.x, mean.y};
    j["cov_theory"] = sym_mat_json(chat);
    j["cov_sample"] = sym_mat_json({s11 / denom, s12 / denom, s22 / denom});
    j["nu"] = nu;
    j["artifacts"] = artifacts;
    finish_figure(cfg, j, t0, fig);
    return 0;
}

// Confidence-level sets around the edge vector with an observed F cloud.
int repro_fig14a(const CommonFlags& flags) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = figure_base(flags, "fig14a");
    cfg.n_null = 1000;
    cfg.n_alt = 1000;
    const SampleSet samples = run_replicates(cfg.experiment());
    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const CovContext ctx(kernel, cfg.test_noise(), cfg.grid(), edge.x0);
    const double nu = std::sqrt(nu_sq(ctx, cfg.rho));
    const Vec2 h = samples.h;
    const double h_mag = h.norm();

    FILE* f = open_csv(art(cfg, "fig14a_scatter.csv"));
    std::fprintf(f, "f1,f2\n");
    for (const Vec2& v : samples.alt_vec)
        std::fprintf(f, "%.12g,%.12g\n", v.x / h_mag, v.y / h_mag);
    std::fclose(f);
    stamp_text(art(cfg, "fig14a_scatter.csv"), cfg);

    const std::vector<double> alphas{0.5, 0.32, 0.1, 0.05, 0.01};
    FILE* c = open_csv(art(cfg, "fig14a_circles.csv"));
    std::fprintf(c, "alpha,center_f1,center_f2,radius\n");
    for (double a : alphas)
        std::fprintf(c, "%.12g,%.12g,%.12g,%.12g\n", a, h.x / h_mag, h.y / h_mag,
                     nu * std::sqrt(-2.0 * std::log(a)) / h_mag);
    std::fclose(c);
    stamp_text(art(cfg, "fig14a_circles.csv"), cfg);

    // Empirical coverage of the 95% level set.
    const double r95 = nu * std::sqrt(-2.0 * std::log(0.05));
    std::size_t inside = 0;
    for (const Vec2& v : samples.alt_vec)
        if ((v - h).norm() <= r95) ++inside;

    json j = base_summary(cfg, "repro fig14a");
    j["digest"] = samples.spec_digest;
    j["H_observed"] = {h.x, h.y};
    j["nu"] = nu;
    j["coverage_095_empirical"] =
        static_cast<double>(inside) / static_cast<double>(samples.alt_vec.size());
    j["artifacts"] = {"fig14a_scatter.csv", "fig14a_circles.csv"};
    finish_figure(cfg, j, t0, "fig14a");
    return 0;
}

// Theoretical power of the 1D(linear) and 2D detectors across noise levels.
int repro_fig14b(const CommonFlags& flags) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = figure_base(flags, "fig14b");
    cfg.sigma_grid.clear();
    for (int i = 0; i <= 20; ++i)
        cfg.sigma_grid.push_back(0.25 * std::pow(2.0, 0.5 * i)); // 0.25 .. 256
    const PowerTable table =
        power_vs_sigma(cfg.experiment(), cfg.sigma_grid, cfg.alpha);
    write_power_csv(art(cfg, "power_vs_sigma.csv"), table);
    stamp_text(art(cfg, "power_vs_sigma.csv"), cfg);

    json j = base_summary(cfg, "repro fig14b");
    j["alpha"] = table.alpha;
    j["artifacts"] = {"power_vs_sigma.csv"};
    finish_figure(cfg, j, t0, "fig14b");
    return 0;
}

// Direction / magnitude densities across noise levels with the coverage
// curve at the reference level.
int repro_fig_uq(const CommonFlags& flags, const std::string& fig) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = figure_base(flags, fig);
    const Kernel kernel = cfg.kernel();
    const EdgePoint edge = cfg.edge();
    const EdgeVector ev = edge_vector(kernel, cfg.rho, edge.delta_f, edge.theta0);
    const std::vector<double> sigmas{0.87, std::sqrt(3.0), 5.2, 17.3, 173.0};
    const bool direction = fig == "fig15";

    FILE* f = open_csv(art(cfg, fig + "_pdfs.csv"));
    std::fprintf(f, direction ? "sigma,theta,density\n" : "sigma,t,density\n");
    double nu_ref = 0.0;
    for (double s : sigmas) {
        RunConfig level = cfg;
        level.test_sigma = s;
        const CovContext ctx(kernel, level.test_noise(), cfg.grid(), edge.x0);
        const double nu = std::sqrt(nu_sq(ctx, cfg.rho));
        if (s == std::sqrt(3.0)) nu_ref = nu;
        const PolarPdf pdf = direction ? tabulate_direction_pdf(ev.h, nu)
                                       : tabulate_magnitude_pdf(ev.h, nu);
        for (std::size_t i = 0; i < pdf.grid.size(); ++i)
            std::fprintf(f, "%.12g,%.12g,%.12g\n", s, pdf.grid[i], pdf.values[i]);
    }
    std::fclose(f);
    stamp_text(art(cfg, fig + "_pdfs.csv"), cfg);

    json j = base_summary(cfg, "repro " + fig);
    j["H"] = {ev.h.x, ev.h.y};
    j["nu_at_sqrt3"] = nu_ref;
    j["m_at_sqrt3"] = ev.h.norm() / nu_ref;

    const std::string cov_name = fig + "_coverage.csv";
    if (direction) {
        FILE* c = open_csv(art(cfg, cov_name));
        std::fprintf(c, "omega_deg,coverage\n");
        for (int i = 0; i <= 360; ++i) {
            const double omega = M_PI * i / 360.0;
            std::fprintf(c, "%.12g,%.12g\n", omega * 180.0 / M_PI,
                         direction_coverage(omega, ev.h, nu_ref));
        }
        std::fclose(c);
        j["omega_at_level_deg"] =
            invert_coverage(
                [&](double w) { return direction_coverage(w, ev.h, nu_ref); },
                0.0, M_PI, cfg.uq_level) *
            180.0 / M_PI;
    } else {
        const double r_max = 0.999 * ev.h.norm();
        FILE* c = open_csv(art(cfg, cov_name));
        std::fprintf(c, "r,coverage\n");
        for (int i = 1; i <= 400; ++i) {
            const double r = r_max * i / 400.0;
            std::fprintf(c, "%.12g,%.12g\n", r,
                         magnitude_coverage(r, ev.h, nu_ref));
        }
        std::fclose(c);
        const double max_cov = magnitude_coverage(r_max, ev.h, nu_ref);
        j["max_coverage"] = max_cov;
        if (max_cov >= cfg.uq_level) {
            j["attainable"] = true;
            j["r_at_level"] = invert_coverage(
                [&](double r) { return magnitude_coverage(r, ev.h, nu_ref); },
                0.0, r_max, cfg.uq_level);
        } else {
            j["attainable"] = false;
        }
    }
    stamp_text(art(cfg, cov_name), cfg);
    j["level"] = cfg.uq_level;
    j["artifacts"] = {fig + "_pdfs.csv", cov_name};
    finish_figure(cfg, j, t0, fig);
    return 0;
}

// Full-image scan: reconstruction, |F| maps with and without noise, the
// direction map, and the extracted edge set.
int repro_fig17(const CommonFlags& flags) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = figure_base(flags, "fig17");
    cfg.noise_sigma = 4.0 * std::sqrt(3.0);
    cfg.noise_vartheta = "sqrt-eps-over-kappa";
    cfg.scan_stride = 3;
    cfg.scan_quantile = 1.0 - 1e-5;

    const Kernel kernel = cfg.kernel();
    const SamplingGrid grid = cfg.grid();
    const Phantom phantom = cfg.phantom();
    const Sinogram det = sample_radon(phantom, grid);
    const std::vector<double> noise = draw_noise(grid, cfg.noise(), cfg.seed, 0);
    const Sinogram noisy = add_noise(det, noise);

    json j = base_summary(cfg, "repro fig17");
    j["noise_to_signal"] = l2_norm(noise) / l2_norm(det.values);

    // One reconstruction per sinogram; the noisy one doubles as the display
    // image.
    const BoundingBox bbox{cfg.image_x_min, cfg.image_x_max, cfg.image_y_min,
                           cfg.image_y_max};
    const ImageGrid recon = fbp_image(noisy, kernel, bbox, cfg.image_step);
    write_image_pgm(recon, art(cfg, "fig17_recon.pgm"));
    stamp_pgm(art(cfg, "fig17_recon.pgm"), cfg);

    EdgeMap map_noisy = run_scan(cfg, kernel, recon, "fig17_noisy_", j);
    EdgeMap map_det = run_scan(
        cfg, kernel, fbp_image(det, kernel, bbox, cfg.image_step),
        "fig17_noiseless_", j);

    // Localization score of the thresholded noisy map.
    const Disk& disk = phantom.disks().front();
    const std::vector<Vec2> circle = circle_points(disk.center, disk.radius, 2048);
    std::vector<Vec2> detected;
    for (std::size_t i = 0; i < map_noisy.mask.size(); ++i)
        if (map_noisy.mask[i]) detected.push_back(map_noisy.centers[i]);
    if (!detected.empty()) {
        const double haus = hausdorff_distance(detected, circle);
        j["hausdorff_to_circle"] = haus;
        j["hausdorff_over_epsilon"] = haus / cfg.grid_epsilon;
    }
    j["detected_centers"] = detected.size();

    // Direction accuracy of the noiseless map near the boundary.
    ThresholdPolicy rel;
    rel.relative_fraction = 0.5;
    extract_edges(map_det, rel);
    std::vector<double> gaps;
    for (std::size_t i = 0; i < map_det.mask.size(); ++i) {
        if (!map_det.mask[i]) continue;
        const double normal = (map_det.centers[i] - disk.center).angle();
        double gap = std::fmod(std::abs(map_det.theta[i] - normal), M_PI);
        gap = std::min(gap, M_PI - gap);
        gaps.push_back(gap * 180.0 / M_PI);
    }
    if (!gaps.empty()) {
        std::sort(gaps.begin(), gaps.end());
        j["theta_median_error_deg"] = gaps[gaps.size() / 2];
    }

    j["artifacts"] = {"fig17_recon.pgm",       "fig17_noisy_mag.csv",
                      "fig17_noisy_mag.pgm",   "fig17_noisy_theta.csv",
                      "fig17_noisy_quiver.csv", "fig17_noiseless_mag.csv",
                      "fig17_noiseless_mag.pgm", "fig17_noiseless_theta.csv",
                      "fig17_noiseless_quiver.csv"};
    finish_figure(cfg, j, t0, "fig17");
    return 0;
}

} // namespace

int cmd_repro(const std::string& figure, const CommonFlags& flags) {
    if (figure == "fig1") return repro_fig1(flags);
    if (figure == "fig3") return repro_fig_1d(flags, "fig3", "linear");
    if (figure == "fig5") return repro_fig5(flags);
    if (figure == "fig7") return repro_fig_1d(flags, "fig7", "sign");
    if (figure == "fig11") return repro_fig11(flags);
    if (figure == "fig12") return repro_fig12_13(flags, "fig12");
    if (figure == "fig13") return repro_fig12_13(flags, "fig13");
    if (figure == "fig14a") return repro_fig14a(flags);
    if (figure == "fig14b") return repro_fig14b(flags);
    if (figure == "fig14")
        return repro_fig14a(flags) + repro_fig14b(flags);
    if (figure == "fig15") return repro_fig_uq(flags, "fig15");
    if (figure == "fig16") return repro_fig_uq(flags, "fig16");
    if (figure == "fig17") return repro_fig17(flags);
    if (figure == "all") {
        int rc = 0;
        for (const char* fig : {"fig1", "fig3", "fig5", "fig7", "fig11", "fig12",
                                "fig13", "fig14", "fig15", "fig16", "fig17"})
            rc += cmd_repro(fig, flags);
        return rc;
    }
    throw ConfigError(
        "unknown figure id '" + figure +
        "'; expected fig1, fig3, fig5, fig7, fig11, fig12, fig13, fig14, "
        "fig14a, fig14b, fig15, fig16, fig17, or all");
}

} // namespace ctedge::cli
