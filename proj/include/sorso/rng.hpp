#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sorso {

// splitmix64; used to derive independent stream seeds from (seed, tag) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic random stream. Wraps mt19937_64 but converts to doubles by
// hand so sequences do not depend on the standard library's distribution
// implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        gen_.seed(seed);
        has_spare_ = false;
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) { return gen_() % n; }

    // Standard normal via Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sorso
