#pragma once

#include <cstdint>

namespace lafs {

// Counter-based deterministic RNG. Every draw is a pure function of
// (seed, stream, counter), so results are identical across platforms and
// independent of call interleaving between streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream ^ 0x9e3779b97f4a7c15ull))), counter_(0) {}

    // Derive an independent substream; drawing from one never affects the other.
    Rng fork(std::uint64_t stream) const { return Rng(key_, stream + 1); }

    std::uint64_t next_u64() { return mix(key_ ^ mix(++counter_)); }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [lo, hi] inclusive.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return lo + next_u64() % (hi - lo + 1);
    }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace lafs
