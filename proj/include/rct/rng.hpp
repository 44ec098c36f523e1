#pragma once

#include <cstdint>
#include <random>

namespace rct {

// splitmix64 finalizer; used to derive independent per-task seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic generator. std::mt19937_64's sequence is fixed by the
/// standard; the real-valued mapping is done here so results do not depend
/// on the library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, std::uint64_t index) : engine_(mix_seed(seed, index)) {}

    // [0, 1)
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // (lo, hi]
    double uniform_open_closed(double lo, double hi) { return hi - (hi - lo) * unit(); }

    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

}  // namespace rct
