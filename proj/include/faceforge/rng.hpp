#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace faceforge {

// 64-bit FNV-1a, used for stable stream tags and content hashes.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
    return fnv1a64(std::string_view(static_cast<const char*>(data), size), seed);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d4a2ca9f6cc725ULL;
    return x ^ (x >> 31);
}

// Child stream for one named field. Adding new fields never perturbs the
// streams of existing ones, and sample index and field tag both feed in.
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) {
    return splitmix64(parent ^ fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return splitmix64(splitmix64(parent) ^ (index * 0x9e3779b97f4a7c15ULL + 1));
}

// Deterministic generator: mt19937_64 (bit-exact per the standard) plus
// in-house uniform/normal mappings, since std distributions are
// implementation-defined and would break cross-toolchain reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // modulo bias is negligible for n << 2^64 (collection sizes, bins)
        return n == 0 ? 0 : engine_() % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; one fresh pair per two draws, spare cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace faceforge
