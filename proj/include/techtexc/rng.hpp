#pragma once

#include <cassert>
#include <cstdint>
#include <random>

namespace techtexc {

/// Deterministic uniform random source.
///
/// All draws are derived from std::mt19937_64 raw output with hand-rolled
/// conversions, so a given seed produces the same stream on every platform
/// (the std::uniform_* distributions are implementation-defined and would
/// not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        assert(n > 0);
        std::uint64_t mask = n - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        for (;;) {
            const std::uint64_t v = engine_() & mask;
            if (v < n) return v;
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a master seed (splitmix64
/// finalizer). Stream ids keep e.g. shuffling and dropout decoupled while
/// both remain functions of the one user-visible seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace techtexc
