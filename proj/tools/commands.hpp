#pragma once

#include <cstdint>
#include <string>

#include "run_config.hpp"

namespace ctedge::cli {

// Command-line overrides applied on top of the config file.
struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool force_direct = false;
};

// Loads the config (defaults when no path is given) and applies overrides.
RunConfig resolve(const CommonFlags& flags);

int cmd_simulate(const RunConfig& cfg);
int cmd_recon(const RunConfig& cfg);
int cmd_cov_report(const RunConfig& cfg);
int cmd_test1d(const RunConfig& cfg);
int cmd_test2d(const RunConfig& cfg);
int cmd_roc(const RunConfig& cfg);
int cmd_power_curve(const RunConfig& cfg);
int cmd_uq_direction(const RunConfig& cfg);
int cmd_uq_magnitude(const RunConfig& cfg);
int cmd_scan(const RunConfig& cfg);

// Canned experiment drivers regenerating the plot data behind the published
// figures: fig1, fig3, fig5, fig7, fig11, fig12, fig13, fig14 (or fig14a /
// fig14b separately), fig15, fig16, fig17, or "all". Artifacts land in
// <out>/<figure-id>/.
int cmd_repro(const std::string& figure, const CommonFlags& flags);

} // namespace ctedge::cli
