#include "hdport/montecarlo/seeding.hpp"

#include <bit>

namespace hdp::montecarlo {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t n, double phi, std::uint64_t rep) noexcept {
    // Chained absorption: each field passes through the full mixer before
    // the next is added, so small field changes avalanche.
    std::uint64_t h = mix64(master);
    h = mix64(h ^ static_cast<std::uint64_t>(tag));
    h = mix64(h ^ n);
    h = mix64(h ^ std::bit_cast<std::uint64_t>(phi));
    h = mix64(h ^ rep);
    return h;
}

Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

} // namespace hdp::montecarlo
