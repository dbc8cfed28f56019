#include "run_config.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ctedge/errors.hpp"

namespace ctedge::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        else if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

double parse_number(const std::string& key, const std::string& raw) {
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': expected a number, got '" +
                          raw + "'");
    return v;
}

long long parse_integer(const std::string& key, const std::string& raw) {
    const double v = parse_number(key, raw);
    const long long n = std::llround(v);
    if (static_cast<double>(n) != v)
        throw ConfigError("config key '" + key + "': expected an integer, got '" +
                          raw + "'");
    return n;
}

bool parse_boolean(const std::string& key, const std::string& raw) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" +
                      raw + "'");
}

std::string parse_string(const std::string& key, const std::string& raw) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
        return raw.substr(1, raw.size() - 2);
    if (raw.find('"') != std::string::npos)
        throw ConfigError("config key '" + key + "': unbalanced quotes");
    return raw;
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']')
        throw ConfigError("config key '" + key + "': expected [v1, v2, ...]");
    std::vector<double> out;
    std::string body = raw.substr(1, raw.size() - 2);
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const auto comma = body.find(',', pos);
        const std::string item =
            trim(body.substr(pos, comma == std::string::npos ? std::string::npos
                                                             : comma - pos));
        if (!item.empty()) out.push_back(parse_number(key, item));
        else if (comma != std::string::npos || !out.empty())
            throw ConfigError("config key '" + key + "': empty list element");
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void assign(RunConfig& c, const std::string& key, const std::string& raw) {
    if (key == "disks") c.disks = parse_list(key, raw);
    else if (key == "support") c.support = parse_number(key, raw);
    else if (key == "grid.epsilon") c.grid_epsilon = parse_number(key, raw);
    else if (key == "grid.kappa") c.grid_kappa = parse_number(key, raw);
    else if (key == "grid.p_bar") c.grid_p_bar = parse_number(key, raw);
    else if (key == "grid.P") c.grid_P = parse_number(key, raw);
    else if (key == "noise.sigma") c.noise_sigma = parse_number(key, raw);
    else if (key == "noise.family") c.noise_family = parse_string(key, raw);
    else if (key == "noise.raw_std") c.noise_raw_std = parse_boolean(key, raw);
    else if (key == "noise.vartheta") c.noise_vartheta = parse_string(key, raw);
    else if (key == "noise.modulation") c.noise_modulation = parse_number(key, raw);
    else if (key == "kernel.name") c.kernel_name = parse_string(key, raw);
    else if (key == "kernel.truncation") c.kernel_truncation = parse_number(key, raw);
    else if (key == "edge.disk") c.edge_disk = static_cast<int>(parse_integer(key, raw));
    else if (key == "edge.angle") c.edge_angle = parse_number(key, raw);
    else if (key == "rho") c.rho = parse_number(key, raw);
    else if (key == "statistic") c.statistic = parse_string(key, raw);
    else if (key == "alpha") c.alpha = parse_number(key, raw);
    else if (key == "n_null") c.n_null = static_cast<int>(parse_integer(key, raw));
    else if (key == "n_alt") c.n_alt = static_cast<int>(parse_integer(key, raw));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_integer(key, raw));
    else if (key == "independent_alt") c.independent_alt = parse_boolean(key, raw);
    else if (key == "mc.quadrature_step") c.mc_quadrature_step = parse_number(key, raw);
    else if (key == "mc.segment_step") c.mc_segment_step = parse_number(key, raw);
    else if (key == "mc.force_direct") c.mc_force_direct = parse_boolean(key, raw);
    else if (key == "test.sigma") c.test_sigma = parse_number(key, raw);
    else if (key == "recon.target") c.recon_target = parse_string(key, raw);
    else if (key == "patch.h") c.patch_h = parse_number(key, raw);
    else if (key == "image.x_min") c.image_x_min = parse_number(key, raw);
    else if (key == "image.x_max") c.image_x_max = parse_number(key, raw);
    else if (key == "image.y_min") c.image_y_min = parse_number(key, raw);
    else if (key == "image.y_max") c.image_y_max = parse_number(key, raw);
    else if (key == "image.step") c.image_step = parse_number(key, raw);
    else if (key == "scan.stride") c.scan_stride = static_cast<int>(parse_integer(key, raw));
    else if (key == "scan.quantile") c.scan_quantile = parse_number(key, raw);
    else if (key == "scan.fraction") c.scan_fraction = parse_number(key, raw);
    else if (key == "scan.noiseless") c.scan_noiseless = parse_boolean(key, raw);
    else if (key == "sigma_grid") c.sigma_grid = parse_list(key, raw);
    else if (key == "uq.level") c.uq_level = parse_number(key, raw);
    else if (key == "out") c.out_dir = parse_string(key, raw);
    else throw ConfigError("unknown config key: '" + key + "'");
}

void validate(const RunConfig& c) {
    if (c.disks.empty() || c.disks.size() % 4 != 0)
        throw ConfigError("config key 'disks': expected cx, cy, r, amp quadruples");
    if (c.noise_family != "uniform" && c.noise_family != "gaussian")
        throw ConfigError("config key 'noise.family': expected uniform or gaussian");
    if (c.noise_vartheta != "one" && c.noise_vartheta != "sqrt-eps-over-kappa")
        throw ConfigError(
            "config key 'noise.vartheta': expected one or sqrt-eps-over-kappa");
    if (c.noise_raw_std && c.noise_vartheta != "one")
        throw ConfigError(
            "config: noise.raw_std bypasses scaling; leave noise.vartheta at one");
    if (c.statistic != "2d" && c.statistic != "linear" && c.statistic != "sign")
        throw ConfigError("config key 'statistic': expected 2d, linear, or sign");
    if (c.recon_target != "image" && c.recon_target != "patch")
        throw ConfigError("config key 'recon.target': expected image or patch");
    if (!(c.alpha > 0.0 && c.alpha < 1.0))
        throw ConfigError("config key 'alpha': must lie in (0, 1)");
    if (!(c.uq_level > 0.0 && c.uq_level < 1.0))
        throw ConfigError("config key 'uq.level': must lie in (0, 1)");
    if (!(c.scan_quantile > 0.0 && c.scan_quantile < 1.0))
        throw ConfigError("config key 'scan.quantile': must lie in (0, 1)");
    if (c.scan_fraction < 0.0 || c.scan_fraction > 1.0)
        throw ConfigError("config key 'scan.fraction': must lie in [0, 1]");
    if (c.edge_disk < 0 ||
        static_cast<std::size_t>(c.edge_disk) >= c.disks.size() / 4)
        throw ConfigError("config key 'edge.disk': no such disk");
    if (!(c.noise_sigma >= 0.0))
        throw ConfigError("config key 'noise.sigma': must be nonnegative");
    if (!(c.patch_h > 0.0))
        throw ConfigError("config key 'patch.h': must be positive");
    if (!(c.image_step > 0.0))
        throw ConfigError("config key 'image.step': must be positive");
    for (double s : c.sigma_grid)
        if (!(s > 0.0))
            throw ConfigError("config key 'sigma_grid': entries must be positive");
}

// Canonical serialization shared by hash(); one line per key in the
// documented order, doubles at full precision.
std::string canonical(const RunConfig& c) {
    std::ostringstream os;
    const auto num = [&os](const char* key, double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << key << '=' << buf << '\n';
    };
    const auto str = [&os](const char* key, const std::string& v) {
        os << key << '=' << v << '\n';
    };
    const auto flag = [&os](const char* key, bool v) {
        os << key << '=' << (v ? 1 : 0) << '\n';
    };
    os << "disks=";
    for (std::size_t i = 0; i < c.disks.size(); ++i) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", c.disks[i]);
        os << (i ? "," : "") << buf;
    }
    os << '\n';
    num("support", c.support);
    num("grid.epsilon", c.grid_epsilon);
    num("grid.kappa", c.grid_kappa);
    num("grid.p_bar", c.grid_p_bar);
    num("grid.P", c.grid_P);
    num("noise.sigma", c.noise_sigma);
    str("noise.family", c.noise_family);
    flag("noise.raw_std", c.noise_raw_std);
    str("noise.vartheta", c.noise_vartheta);
    num("noise.modulation", c.noise_modulation);
    str("kernel.name", c.kernel_name);
    num("kernel.truncation", c.kernel_truncation);
    os << "edge.disk=" << c.edge_disk << '\n';
    num("edge.angle", c.edge_angle);
    num("rho", c.rho);
    str("statistic", c.statistic);
    num("alpha", c.alpha);
    os << "n_null=" << c.n_null << '\n';
    os << "n_alt=" << c.n_alt << '\n';
    os << "seed=" << c.seed << '\n';
    flag("independent_alt", c.independent_alt);
    num("mc.quadrature_step", c.mc_quadrature_step);
    num("mc.segment_step", c.mc_segment_step);
    flag("mc.force_direct", c.mc_force_direct);
    num("test.sigma", c.test_sigma);
    str("recon.target", c.recon_target);
    num("patch.h", c.patch_h);
    num("image.x_min", c.image_x_min);
    num("image.x_max", c.image_x_max);
    num("image.y_min", c.image_y_min);
    num("image.y_max", c.image_y_max);
    num("image.step", c.image_step);
    os << "scan.stride=" << c.scan_stride << '\n';
    num("scan.quantile", c.scan_quantile);
    num("scan.fraction", c.scan_fraction);
    flag("scan.noiseless", c.scan_noiseless);
    os << "sigma_grid=";
    for (std::size_t i = 0; i < c.sigma_grid.size(); ++i) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", c.sigma_grid[i]);
        os << (i ? "," : "") << buf;
    }
    os << '\n';
    num("uq.level", c.uq_level);
    // out_dir is deliberately not hashed: where artifacts land does not
    // change what was computed.
    return os.str();
}

} // namespace

Phantom RunConfig::phantom() const {
    std::vector<Disk> ds;
    for (std::size_t i = 0; i + 3 < disks.size(); i += 4)
        ds.push_back({{disks[i], disks[i + 1]}, disks[i + 2], disks[i + 3]});
    return Phantom(ds, support);
}

SamplingGrid RunConfig::grid() const {
    return SamplingGrid::natural(grid_epsilon, grid_kappa, grid_p_bar, grid_P);
}

Kernel RunConfig::kernel() const {
    return Kernel::from_name(kernel_name, kernel_truncation);
}

NoiseModel RunConfig::noise() const {
    const NoiseModel::Family fam = noise_family == "gaussian"
                                       ? NoiseModel::Family::gaussian
                                       : NoiseModel::Family::uniform;
    NoiseModel m = noise_modulation != 0.0
                       ? NoiseModel::angular(noise_sigma, noise_modulation, fam)
                       : NoiseModel::constant(noise_sigma, fam, noise_raw_std);
    if (noise_vartheta == "sqrt-eps-over-kappa") {
        const double kappa = grid_kappa;
        m.vartheta = [kappa](double eps) { return std::sqrt(eps / kappa); };
    }
    return m;
}

NoiseModel RunConfig::test_noise() const {
    NoiseModel m = noise();
    if (test_sigma > 0.0) {
        const double s = test_sigma;
        m.sigma = [s](double, double) { return s; };
    }
    return m;
}

EdgePoint RunConfig::edge() const {
    return phantom().boundary_point(static_cast<std::size_t>(edge_disk),
                                    edge_angle);
}

StatKind RunConfig::stat_kind() const {
    if (statistic == "2d") return StatKind::f_2d;
    if (statistic == "linear") return StatKind::f_u_linear;
    return StatKind::f_u_sign;
}

Weight1d RunConfig::weight_1d() const {
    if (statistic == "linear") return Weight1d::linear;
    if (statistic == "sign") return Weight1d::sign;
    throw ConfigError("statistic '2d' has no 1D weight; set statistic = linear or sign");
}

ExperimentSpec RunConfig::experiment() const {
    ExperimentSpec spec;
    spec.phantom = phantom();
    spec.boundary_index = static_cast<std::size_t>(edge_disk);
    spec.boundary_angle = edge_angle;
    spec.grid = grid();
    spec.noise = noise();
    spec.kernel = kernel();
    spec.rho = rho;
    spec.kind = stat_kind();
    spec.n_null = n_null;
    spec.n_alt = n_alt;
    spec.seed = seed;
    spec.independent_alt = independent_alt;
    spec.quadrature_step = mc_quadrature_step;
    spec.segment_step = mc_segment_step;
    spec.force_direct = mc_force_direct;
    return spec;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["disks"] = disks;
    j["support"] = support;
    j["grid"] = {{"epsilon", grid_epsilon},
                 {"kappa", grid_kappa},
                 {"p_bar", grid_p_bar},
                 {"P", grid_P}};
    j["noise"] = {{"sigma", noise_sigma},
                  {"family", noise_family},
                  {"raw_std", noise_raw_std},
                  {"vartheta", noise_vartheta},
                  {"modulation", noise_modulation}};
    j["kernel"] = {{"name", kernel_name}, {"truncation", kernel_truncation}};
    j["edge"] = {{"disk", edge_disk}, {"angle", edge_angle}};
    j["rho"] = rho;
    j["statistic"] = statistic;
    j["alpha"] = alpha;
    j["n_null"] = n_null;
    j["n_alt"] = n_alt;
    j["seed"] = seed;
    j["independent_alt"] = independent_alt;
    j["mc"] = {{"quadrature_step", mc_quadrature_step},
               {"segment_step", mc_segment_step},
               {"force_direct", mc_force_direct}};
    j["test"] = {{"sigma", test_sigma}};
    j["recon"] = {{"target", recon_target}};
    j["patch"] = {{"h", patch_h}};
    j["image"] = {{"x_min", image_x_min},
                  {"x_max", image_x_max},
                  {"y_min", image_y_min},
                  {"y_max", image_y_max},
                  {"step", image_step}};
    j["scan"] = {{"stride", scan_stride},
                 {"quantile", scan_quantile},
                 {"fraction", scan_fraction},
                 {"noiseless", scan_noiseless}};
    j["sigma_grid"] = sigma_grid;
    j["uq"] = {{"level", uq_level}};
    j["out"] = out_dir;
    return j;
}

std::string RunConfig::hash() const {
    const std::string s = canonical(*this);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return std::string(buf);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string raw = trim(line.substr(eq + 1));
        if (key.empty() || raw.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key or value");
        if (!seen.insert(key).second)
            throw ConfigError("duplicate config key: '" + key + "'");
        assign(cfg, key, raw);
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace ctedge::cli
