#pragma once

#include <array>
#include <cstdint>

namespace delaylab::rng {

// Philox 4x32-10 block cipher: 128-bit counter, 64-bit key, 128-bit output.
std::array<std::uint32_t, 4> philox4x32(
    const std::array<std::uint32_t, 4>& counter, std::uint64_t key);

// Standard normal draw fully determined by (seed, index). Any draw is
// reproducible independently of the order in which draws are requested, so
// parallel workers need no shared generator state.
double standard_normal(std::uint64_t seed, std::uint64_t index);

// Uniform draw on the open interval (0,1), determined by (seed, index).
double uniform01(std::uint64_t seed, std::uint64_t index);

std::uint64_t splitmix64(std::uint64_t x);

// Seed of one Monte Carlo path, derived from (master seed, stream, index).
// The layout is stable: estimators rely on it for nested-path reproducibility.
std::uint64_t path_seed(std::uint64_t master, std::uint64_t stream,
                        std::uint64_t index);

}  // namespace delaylab::rng
