#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

namespace dnls {

/// Counter-based generator: splitmix64 finalizer applied to key + golden-ratio
/// increments of a call counter. State evolution is fully documented by this
/// header, so streams are reproducible across platforms and compilers.
/// Substreams derive the key from (seed, purpose label); adding a consumer
/// never shifts existing streams.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key), counter_(0) {}

    static Rng for_purpose(std::uint64_t seed, std::string_view purpose) {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the label
        for (char c : purpose) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return Rng(mix(seed ^ h));
    }

    std::uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi() * u2);
    }

    std::complex<double> complex_normal() {
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(two_pi() * u2), r * std::sin(two_pi() * u2)};
    }

private:
    static constexpr double two_pi() { return 6.283185307179586476925287; }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace dnls
