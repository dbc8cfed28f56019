#include "ctedge/sampling.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "ctedge/errors.hpp"
#include "ctedge/rng.hpp"

namespace ctedge {

namespace {

int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -(-a / b); }
int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

} // namespace

SamplingGrid SamplingGrid::natural(double epsilon, double kappa, double p_bar,
                                   double P) {
    if (!(epsilon > 0.0) || !(kappa > 0.0) || !(P > 0.0))
        throw ConfigError("SamplingGrid: epsilon, kappa, P must be positive");
    SamplingGrid g;
    g.epsilon = epsilon;
    g.kappa = kappa;
    g.p_bar = p_bar;
    g.P = P;
    const double r = M_PI / g.delta_alpha();
    g.k_min = static_cast<int>(std::ceil(-r - 1e-9));
    g.k_max = static_cast<int>(std::ceil(r - 1e-9)) - 1;
    g.j_min = static_cast<int>(std::ceil((-P - p_bar) / epsilon - 1e-9));
    g.j_max = static_cast<int>(std::floor((P - p_bar) / epsilon + 1e-9));
    if (g.k_max < g.k_min || g.j_max < g.j_min)
        throw ConfigError("SamplingGrid: empty index range");
    return g;
}

NoiseModel NoiseModel::constant(double sigma_value, Family family,
                                bool raw_std) {
    if (!(sigma_value >= 0.0))
        throw ConfigError("NoiseModel: sigma must be nonnegative");
    NoiseModel m;
    m.family = family;
    m.sigma = [sigma_value](double, double) { return sigma_value; };
    m.raw_std = raw_std;
    return m;
}

NoiseModel NoiseModel::angular(double base, double modulation, Family family) {
    if (!(base >= 0.0) || std::abs(modulation) >= 1.0)
        throw ConfigError("NoiseModel: need base >= 0 and |modulation| < 1");
    NoiseModel m;
    m.family = family;
    m.sigma = [base, modulation](double alpha, double) {
        return base * (1.0 + modulation * std::cos(2.0 * alpha));
    };
    return m;
}

double NoiseModel::std_dev(double alpha, double p,
                           const SamplingGrid& grid) const {
    const double s = sigma ? sigma(alpha, p) : 0.0;
    if (raw_std) return s;
    const double v = vartheta ? vartheta(grid.epsilon) : 1.0;
    return s * std::sqrt(grid.delta_alpha()) * v;
}

bool NoiseModel::parity_holds(const SamplingGrid& grid, double tol) const {
    if (!sigma) return true;
    for (int k = grid.k_min; k <= grid.k_max; ++k) {
        for (int j = grid.j_min; j <= grid.j_max; ++j) {
            const double a = grid.alpha(k), p = grid.p(j);
            if (std::abs(sigma(a + M_PI, -p) - sigma(a, p)) > tol)
                return false;
        }
    }
    return true;
}

Sinogram sample_radon(const Phantom& phantom, const SamplingGrid& grid) {
    for (const Disk& d : phantom.disks())
        if (!(d.center.norm() + d.radius < grid.P))
            throw ConfigError(
                "sample_radon: phantom support exceeds the scan extent");
    Sinogram s;
    s.grid = grid;
    s.values.resize(grid.size());
    for (int k = grid.k_min; k <= grid.k_max; ++k) {
        const double alpha = grid.alpha(k);
        for (int j = grid.j_min; j <= grid.j_max; ++j)
            s.values[grid.cell_index(k, j)] = phantom.radon(alpha, grid.p(j));
    }
    return s;
}

std::vector<double> draw_noise(const SamplingGrid& grid,
                               const NoiseModel& model, std::uint64_t seed,
                               std::uint64_t replicate) {
    std::vector<double> eta(grid.size(), 0.0);
    const CounterRng rng(seed);
    const double sqrt3 = std::sqrt(3.0);
    for (int k = grid.k_min; k <= grid.k_max; ++k) {
        const double alpha = grid.alpha(k);
        for (int j = grid.j_min; j <= grid.j_max; ++j) {
            const std::size_t cell = grid.cell_index(k, j);
            const double sd = model.std_dev(alpha, grid.p(j), grid);
            if (sd == 0.0) continue;
            if (model.family == NoiseModel::Family::uniform) {
                const double u = rng.uniform(replicate, cell);
                eta[cell] = sd * sqrt3 * (2.0 * u - 1.0);
            } else {
                eta[cell] = sd * rng.normal(replicate, cell);
            }
        }
    }
    return eta;
}

Sinogram add_noise(const Sinogram& sinogram,
                   const std::vector<double>& noise) {
    if (noise.size() != sinogram.values.size())
        throw ConfigError("add_noise: dimension mismatch");
    Sinogram out = sinogram;
    for (std::size_t i = 0; i < noise.size(); ++i) out.values[i] += noise[i];
    return out;
}

Sinogram bin(const Sinogram& sinogram, int N) {
    if (N <= 0) throw ConfigError("bin: N must be positive");
    if (N == 1) return sinogram;
    const SamplingGrid& g = sinogram.grid;
    SamplingGrid out = g;
    out.epsilon = N * g.epsilon;
    // Blocks start at original indices N*k' and N*j', so the coarse lattice
    // points remain exact multiples of the new steps; incomplete blocks at
    // the edges are dropped.
    out.k_min = ceil_div(g.k_min, N);
    out.k_max = floor_div(g.k_max - (N - 1), N);
    out.j_min = ceil_div(g.j_min, N);
    out.j_max = floor_div(g.j_max - (N - 1), N);
    if (out.k_max < out.k_min || out.j_max < out.j_min)
        throw ConfigError("bin: no complete blocks at this bin size");
    Sinogram o;
    o.grid = out;
    o.values.resize(out.size());
    const double inv = 1.0 / (static_cast<double>(N) * N);
    for (int k = out.k_min; k <= out.k_max; ++k) {
        for (int j = out.j_min; j <= out.j_max; ++j) {
            double acc = 0.0;
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b)
                    acc += sinogram.at(N * k + a, N * j + b);
            o.values[out.cell_index(k, j)] = acc * inv;
        }
    }
    return o;
}

namespace {

template <class T>
void write_raw(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

} // namespace

void write_sma(const Sinogram& sinogram, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("write_sma: cannot open " + path);
    f.write("SMA1", 4);
    write_raw(f, static_cast<std::uint32_t>(sinogram.grid.n_alpha()));
    write_raw(f, static_cast<std::uint32_t>(sinogram.grid.n_p()));
    write_raw(f, sinogram.grid.delta_alpha());
    write_raw(f, sinogram.grid.epsilon);
    write_raw(f, sinogram.grid.p_bar);
    write_raw(f, sinogram.grid.P);
    f.write(reinterpret_cast<const char*>(sinogram.values.data()),
            static_cast<std::streamsize>(sinogram.values.size() *
                                         sizeof(double)));
    if (!f) throw IoError("write_sma: write failed for " + path);
}

Sinogram read_sma(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("read_sma: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "SMA1", 4) != 0)
        throw IoError("read_sma: bad magic in " + path);
    const auto n_alpha = read_raw<std::uint32_t>(f);
    const auto n_p = read_raw<std::uint32_t>(f);
    const double delta_alpha = read_raw<double>(f);
    const double epsilon = read_raw<double>(f);
    const double p_bar = read_raw<double>(f);
    const double P = read_raw<double>(f);
    if (!f || n_alpha == 0 || n_p == 0 || !(epsilon > 0.0) ||
        !(delta_alpha > 0.0))
        throw IoError("read_sma: bad header in " + path);

    SamplingGrid g;
    g.epsilon = epsilon;
    g.kappa = delta_alpha / epsilon;
    g.p_bar = p_bar;
    g.P = P;
    // Prefer the natural index ranges for these parameters; fall back to a
    // centered range when the stored array has a different shape (the
    // header does not carry index offsets).
    bool natural_ok = false;
    try {
        const SamplingGrid nat =
            SamplingGrid::natural(epsilon, g.kappa, p_bar, P);
        if (static_cast<std::uint32_t>(nat.n_alpha()) == n_alpha &&
            static_cast<std::uint32_t>(nat.n_p()) == n_p) {
            g = nat;
            natural_ok = true;
        }
    } catch (const ConfigError&) {
    }
    if (!natural_ok) {
        g.k_min = -static_cast<int>(n_alpha) / 2;
        g.k_max = g.k_min + static_cast<int>(n_alpha) - 1;
        g.j_min = -static_cast<int>(n_p) / 2;
        g.j_max = g.j_min + static_cast<int>(n_p) - 1;
    }

    Sinogram s;
    s.grid = g;
    s.values.resize(g.size());
    f.read(reinterpret_cast<char*>(s.values.data()),
           static_cast<std::streamsize>(s.values.size() * sizeof(double)));
    if (!f) throw IoError("read_sma: truncated data in " + path);
    return s;
}

void write_sinogram_csv(const Sinogram& sinogram, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("write_sinogram_csv: cannot open " + path);
    f << "k,j,alpha,p,value\n";
    char buf[128];
    const SamplingGrid& g = sinogram.grid;
    for (int k = g.k_min; k <= g.k_max; ++k) {
        for (int j = g.j_min; j <= g.j_max; ++j) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", k, j,
                          g.alpha(k), g.p(j), sinogram.at(k, j));
            f << buf;
        }
    }
    if (!f) throw IoError("write_sinogram_csv: write failed for " + path);
}

} // namespace ctedge
