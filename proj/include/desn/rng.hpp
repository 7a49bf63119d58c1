#pragma once

// Deterministic random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Doubles are produced from the top 53 bits of each draw, so the
// same seed yields bit-identical samples on every conforming platform
// (std::uniform_real_distribution is implementation-defined and is not used).

#include <cstdint>
#include <random>
#include <string_view>

namespace desn {

class Rng {
public:
    static constexpr std::string_view version = "mt19937_64/u53-v1";

    explicit Rng(std::uint64_t seed) : engine_{seed}, seed_{seed} {}

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01();

    /// Uniform on the open interval (lo, hi).
    double uniform(double lo, double hi);

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of member `index` of a composite model: seed XOR splitmix64(index).
constexpr std::uint64_t member_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return seed ^ splitmix64(index);
}

/// Independent named sub-stream of a top-level seed (data, reservoirs, ...).
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(seed ^ splitmix64(0x5eed0000ULL + stream));
}

namespace streams {
inline constexpr std::uint64_t data = 1;
inline constexpr std::uint64_t reservoirs = 2;
inline constexpr std::uint64_t probe_input = 3;
}  // namespace streams

}  // namespace desn
