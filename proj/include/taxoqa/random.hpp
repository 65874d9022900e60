#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace taxoqa {

// 64-bit FNV-1a. Used to derive per-scene and per-item seeds.
constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t basis = 14695981039346656037ULL) noexcept {
    std::uint64_t h = basis;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// splitmix64 finalizer; decorrelates seeds that differ in few bits.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// seed xor hash(tag), mixed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
    return mix64(seed ^ fnv1a(tag));
}

// Seeded generator with platform-independent draws. std::uniform_*_distribution
// is implementation-defined, so bounded integers and unit reals are derived by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform real in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Standard normal by Box-Muller (one draw per call, second discarded).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // First `count` entries of a Fisher-Yates shuffle of `items`.
    template <typename T>
    std::vector<T> sample(std::span<const T> items, std::size_t count) {
        std::vector<T> pool(items.begin(), items.end());
        if (count > pool.size()) count = pool.size();
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(count);
        return pool;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace taxoqa
