// Deterministic randomness: every run derives all generator state from one
// 64-bit seed. Generator is std::mt19937_64 (sequence fixed by the standard);
// uniform doubles are built from raw 64-bit draws so results do not depend on
// the standard library's distribution implementations.
#pragma once

#include <cstdint>
#include <random>

namespace symot {

inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent sub-seed for a named stream of a run.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

// Stream ids used across the toolkit; recorded here so outputs stay
// reproducible from the single user-facing seed.
namespace stream {
inline constexpr std::uint64_t kSitesX = 1;       // samples on Sp(nu)
inline constexpr std::uint64_t kSitesY = 2;       // samples on Sp(mu)
inline constexpr std::uint64_t kShapeSampling = 3;
inline constexpr std::uint64_t kBenchOurs = 4;
inline constexpr std::uint64_t kBenchBaseline = 5;
inline constexpr std::uint64_t kBenchTruth = 6;
}  // namespace stream

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace symot
