#pragma once

#include <cstdint>
#include <random>

namespace hdp::montecarlo {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stream purposes, so that e.g. the loading draw of a cell never shares a
/// seed with any replication.
enum class StreamTag : std::uint64_t {
    Replication = 1,
    Loadings = 2,
    Selection = 3,
};

/**
 * Seed for the stream identified by (master, tag, N, phi, rep). phi enters
 * through its IEEE bit pattern, so 0.0 and -0.0 are different cells.
 */
std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t n, double phi, std::uint64_t rep) noexcept;

Rng make_rng(std::uint64_t seed);

} // namespace hdp::montecarlo
