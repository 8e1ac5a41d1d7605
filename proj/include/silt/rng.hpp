#pragma once

#include <array>
#include <cstdint>

namespace silt {

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective 64-bit mixer.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stream seed for child `index` of `parent`:
///   mix(parent + 0x9E3779B97F4A7C15 * (index + 1)).
/// Used as seed(path) = derive_seed(run_seed, path) and
/// seed(path, component) = derive_seed(seed(path), component), so every
/// component of every path owns an independent stream regardless of the
/// order in which paths are evaluated.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index)
{
    return splitmix64_mix(parent + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// xoshiro256** (Blackman & Vigna), state filled from a SplitMix64 sequence.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()();

    /// Uniform on the open interval (0,1): ((x >> 11) + 0.5) * 2^-53.
    double uniform_open();

    /// Standard normal by inversion of uniform_open() (Wichura AS241).
    double normal();

private:
    std::array<std::uint64_t, 4> s_;
};

/// Standard normal quantile, AS241 PPND16 (about 1e-16 relative accuracy).
double normal_quantile(double p);

/// Standard normal CDF via erfc.
double normal_cdf(double x);

}  // namespace silt
