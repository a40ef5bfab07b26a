#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace cooc {

// Deterministic random source. Draws are implemented here rather than through
// std::uniform_*_distribution so that sequences are identical across standard
// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);

    // Uniform real in [0, 1) with 53 bits of precision.
    double uniform_unit();

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_unit(); }

private:
    std::mt19937_64 engine_;
};

// Derives an independent seed for a named sub-stream ("split", "mask", "init",
// "shuffle", "negatives", ...), optionally indexed (fold, record, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

}  // namespace cooc
