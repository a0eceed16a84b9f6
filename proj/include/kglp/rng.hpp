#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace kglp {

// Deterministic random stream. Streams are derived from a global seed plus a
// purpose label so that independent parts of the system (sampler, init,
// shuffling, ...) never share state. All draws go through our own integer /
// float helpers rather than std::*_distribution, which keeps sequences
// identical across standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {
        // splitmix64 warm-up so nearby seeds diverge immediately
        next_u64();
        next_u64();
    }

    static std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view label) {
        std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return h ^ (global_seed + 0x9e3779b97f4a7c15ull);
    }

    static RngStream named(std::uint64_t global_seed, std::string_view label) {
        return RngStream(derive_seed(global_seed, label));
    }

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, n)
    std::uint64_t next_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // uniform in [0, 1)
    double next_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_real(); }

    bool next_bernoulli(double p) { return next_real() < p; }

    double next_normal() {
        // Box-Muller, one value per call; cached pair member kept for determinism
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = next_real();
        double u2 = next_real();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

} // namespace kglp
