#pragma once

#include <array>
#include <cstdint>

namespace ctedge {

// One block of the Philox-4x32 keyed permutation, 10 rounds.
// Matches the reference known-answer vectors for philox4x32-10.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based generator: every variate is a pure function of
// (seed, stream, index), so parallel consumers never share state and
// any single value can be regenerated in isolation.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed);

    // Uniform on [0, 1), 53-bit resolution.
    double uniform(std::uint64_t stream, std::uint64_t index) const;

    // Standard normal via Box-Muller on the same block.
    double normal(std::uint64_t stream, std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::array<std::uint32_t, 4> block(std::uint64_t stream,
                                       std::uint64_t index) const;

    std::uint64_t seed_;
    std::array<std::uint32_t, 2> key_;
};

} // namespace ctedge
