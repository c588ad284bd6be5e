#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace cartograf {

/// Deterministic 64-bit generator (splitmix64). All randomness in the
/// toolkit flows through this class so that a seed pins every byte of
/// output, independent of platform or standard-library version.
///
/// State update:  s += 0x9E3779B97F4A7C15
/// Output:        z = s; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
///                z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0,n). Modulo reduction; acceptable bias for the
    /// small n used here and trivially reproducible in any language.
    uint64_t below(uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller (no cached spare; two uniforms per call).
    double normal() {
        double u1 = 1.0 - uniform(); // (0,1], keeps log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Fisher-Yates shuffle, descending index order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derive an independent sub-seed from a seed and a stream tag.
    static uint64_t mix(uint64_t seed, uint64_t tag) {
        uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// FNV-1a 64-bit hash, used to seed per-token streams.
    static uint64_t hash_bytes(std::string_view s) {
        uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }

private:
    uint64_t state_;
};

} // namespace cartograf
