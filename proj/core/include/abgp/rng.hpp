#pragma once

#include <cstdint>
#include <string_view>

namespace abgp {

/// Deterministic xoshiro256** generator. Unlike the std distributions, every
/// draw here is fully specified, so a seed pins the whole stream regardless
/// of platform or standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, bound). bound == 0 returns 0.
    std::uint64_t uniform_below(std::uint64_t bound) noexcept;

    /// Uniform in [lo, hi], inclusive. Requires lo <= hi.
    std::int64_t uniform_range(std::int64_t lo, std::int64_t hi) noexcept;

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform01() noexcept;

    /// Child generator derived from this generator's seed and a label, not
    /// from its mutable state. Draws on one fork never shift another.
    Rng fork(std::string_view label) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
};

}  // namespace abgp
