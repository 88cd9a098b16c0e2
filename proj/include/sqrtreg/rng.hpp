#pragma once

#include <cstdint>

namespace sqrtreg {

/// splitmix64: counter-based generator with a 64-bit state. Output sequences
/// are bit-identical across platforms, which keeps seeded benchmarks and data
/// generators reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform draw in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, m).
    std::uint64_t uniform_index(std::uint64_t m) { return next_u64() % m; }

    /// Standard normal draw via the inverse CDF, so the stream depends only on
    /// the splitmix64 output and not on any library's distribution internals.
    double normal();

private:
    std::uint64_t state_;
};

} // namespace sqrtreg
