#include "ctedge/rng.hpp"

#include <cmath>

namespace ctedge {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c,
                       const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline double u64_to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
    round_once(counter, key);
    for (int r = 1; r < 10; ++r) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
        round_once(counter, key);
    }
    return counter;
}

CounterRng::CounterRng(std::uint64_t seed)
    : seed_(seed),
      key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)} {}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t stream,
                                               std::uint64_t index) const {
    return philox4x32({static_cast<std::uint32_t>(index),
                       static_cast<std::uint32_t>(index >> 32),
                       static_cast<std::uint32_t>(stream),
                       static_cast<std::uint32_t>(stream >> 32)},
                      key_);
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t index) const {
    const auto b = block(stream, index);
    const std::uint64_t x = (std::uint64_t{b[1]} << 32) | b[0];
    return u64_to_unit(x);
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t index) const {
    const auto b = block(stream, index);
    const std::uint64_t x0 = (std::uint64_t{b[1]} << 32) | b[0];
    const std::uint64_t x1 = (std::uint64_t{b[3]} << 32) | b[2];
    // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
    const double u1 = (static_cast<double>(x0 >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = u64_to_unit(x1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

} // namespace ctedge
