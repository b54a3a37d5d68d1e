#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace pecf {

/// Deterministic pseudo-random generator used for every stochastic choice in
/// the library (simulation noise, weight init, shuffles, splits).
///
/// The core is the splitmix64 finalizer over a Weyl sequence, with explicit
/// bit-to-double conversion. Nothing here depends on std::<random>
/// distributions, whose output is implementation-defined; the same seed gives
/// the same stream on every build.
class rng {
public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 bits of precision.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Standard normal via Box-Muller; generates pairs and caches the spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - u keeps the argument of log strictly positive.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    /// Integer in [0, n) via the widening-multiply trick (no modulo bias to
    /// speak of for the n used here, and no rejection loop to reason about).
    std::uint64_t below(std::uint64_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
    }

    /// Fisher-Yates shuffle, driven by below() so the permutation is portable.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derives an independent child seed from a root seed and a label, so each
/// pipeline stage (and each fund within a stage) gets its own stream.
/// FNV-1a over the label folded into the root, then finalized with splitmix64.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ root;
    for (const char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return rng(h).next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index) {
    return derive_seed(root ^ (0x9e3779b97f4a7c15ull * (index + 1)), label);
}

} // namespace pecf
