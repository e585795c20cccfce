#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rifs {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Roles of the random streams derived from a master seed. The numeric
/// values are part of the reproducibility contract; do not renumber.
enum class StreamRole : std::uint64_t {
    replica = 1,
    errors = 2,
    words = 3,
    pairs = 4,
    trajectory = 5,
    grid_point = 6,
};

/// Seed split scheme: every stream seed is obtained by folding a path of
/// (role, index, ...) components into the master seed with mix64.
///
///   seed(master, [c1, c2, ...]) = mix64(... mix64(mix64(master) ^ c1) ^ c2 ...)
///
/// A replica r of an experiment draws its errors from
/// seed(master, [replica, r, errors]) and its words from
/// seed(master, [replica, r, words]); sweep grid point g runs its
/// experiment under the master seed seed(master, [grid_point, g]).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

inline std::uint64_t component(StreamRole role) noexcept { return static_cast<std::uint64_t>(role); }

/// A 64-bit Mersenne Twister with platform-independent conversions to
/// doubles (std::uniform_real_distribution is implementation defined).
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

} // namespace rifs
