#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace grainflow {

/// Identifier recorded in provenance so runs can be reproduced elsewhere.
/// std::mt19937_64 is bit-exact across standard libraries; the conversion
/// to doubles below is ours (the std distributions are not portable).
inline constexpr std::string_view rng_algorithm = "mt19937_64+u53";

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        // Lemire-style rejection keeps this unbiased and portable.
        const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finaliser; derives independent child seeds from a master seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace grainflow
