#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ctedge/errors.hpp"
#include "ctedge/parallel.hpp"

namespace {

using ctedge::cli::CommonFlags;
using ctedge::cli::RunConfig;

int dispatch(const CLI::App& app, const CommonFlags& flags,
             const std::string& figure) {
    if (app.got_subcommand("repro")) return ctedge::cli::cmd_repro(figure, flags);

    const RunConfig cfg = ctedge::cli::resolve(flags);
    if (app.got_subcommand("simulate")) return ctedge::cli::cmd_simulate(cfg);
    if (app.got_subcommand("recon")) return ctedge::cli::cmd_recon(cfg);
    if (app.got_subcommand("cov-report")) return ctedge::cli::cmd_cov_report(cfg);
    if (app.got_subcommand("test1d")) return ctedge::cli::cmd_test1d(cfg);
    if (app.got_subcommand("test2d")) return ctedge::cli::cmd_test2d(cfg);
    if (app.got_subcommand("roc")) return ctedge::cli::cmd_roc(cfg);
    if (app.got_subcommand("power-curve")) return ctedge::cli::cmd_power_curve(cfg);
    if (app.got_subcommand("uq-direction"))
        return ctedge::cli::cmd_uq_direction(cfg);
    if (app.got_subcommand("uq-magnitude"))
        return ctedge::cli::cmd_uq_magnitude(cfg);
    if (app.got_subcommand("scan")) return ctedge::cli::cmd_scan(cfg);
    std::fprintf(stderr, "no subcommand given\n");
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "ctedge: edge detection for discretely sampled 2D computed tomography.\n"
        "Simulates noisy sinograms, reconstructs locally or globally, reports\n"
        "the limiting covariances, runs calibrated edge tests, and regenerates\n"
        "the published experiment data."};
    app.require_subcommand(1);
    app.fallthrough(); // accept the global flags after the subcommand too

    CommonFlags flags;
    app.add_option("--config", flags.config_path,
                   "Key=value config file (defaults used when omitted)")
        ->check(CLI::ExistingFile);
    auto* seed_opt =
        app.add_option("--seed", flags.seed, "Override the config seed");
    app.add_option("--out", flags.out_dir, "Override the output directory");
    app.add_option("--threads", flags.threads,
                   "Worker thread cap (0 = all hardware threads)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--force-direct-path", flags.force_direct,
                 "Evaluate Monte Carlo replicates by full local reconstruction "
                 "instead of precomputed sinogram weights (slow; verification)");

    app.add_subcommand("simulate",
                       "Write the exact and noisy sinograms of the scene");
    app.add_subcommand("recon",
                       "Reconstruct a global image or a local patch by "
                       "filtered backprojection");
    app.add_subcommand("cov-report",
                       "Report the limiting covariance quantities at the "
                       "configured edge point");
    app.add_subcommand("test1d",
                       "Run the calibrated 1D segment test on one noisy draw");
    app.add_subcommand("test2d",
                       "Run the calibrated 2D disk test on one noisy draw");
    app.add_subcommand("roc",
                       "Replicate the configured statistic under both "
                       "hypotheses and write histogram, ROC, and diagnostics");
    app.add_subcommand("power-curve",
                       "Tabulate theoretical 1D and 2D power across the "
                       "configured noise levels");
    app.add_subcommand("uq-direction",
                       "Tabulate the edge-direction density and coverage");
    app.add_subcommand("uq-magnitude",
                       "Tabulate the edge-magnitude density and coverage");
    app.add_subcommand("scan",
                       "Slide the disk statistic across a reconstructed image "
                       "and extract the thresholded edge map");

    std::string figure;
    auto* repro = app.add_subcommand(
        "repro",
        "Regenerate the data behind a published figure with its canned "
        "config (--seed/--out/--force-direct-path still apply)");
    repro->add_option("figure", figure,
                      "fig1, fig3, fig5, fig7, fig11, fig12, fig13, fig14, "
                      "fig14a, fig14b, fig15, fig16, fig17, or all")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // bad usage is a config error
    }

    flags.seed_set = seed_opt->count() > 0;
    if (flags.threads > 0) ctedge::set_max_threads(flags.threads);

    try {
        return dispatch(app, flags, figure);
    } catch (const ctedge::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ctedge::PreconditionError& e) {
        std::fprintf(stderr, "precondition violated: %s\n", e.what());
        return 3;
    } catch (const ctedge::NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
