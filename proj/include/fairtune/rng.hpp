#ifndef FAIRTUNE_RNG_HPP
#define FAIRTUNE_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace fairtune {

// The standard distributions are implementation-defined, so bounded draws are
// done here on top of mt19937_64 (whose output sequence is fixed by the
// standard). Runs therefore replay bit-exactly across toolchains.

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return splitmix64(seed ^ splitmix64(value + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::string_view value) noexcept {
    return hash_combine(seed, fnv1a64(value));
}

template <typename... Rest>
std::uint64_t hash_all(std::uint64_t seed, Rest const&... rest) noexcept {
    ((seed = hash_combine(seed, rest)), ...);
    return seed;
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform integer in [lo, hi] (inclusive), rejection sampled.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        auto const span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_());
        std::uint64_t const threshold = (0 - span) % span;  // 2^64 mod span
        std::uint64_t x;
        do {
            x = engine_();
        } while (x < threshold);
        return lo + static_cast<std::int64_t>(x % span);
    }

    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

/// Stateless generator: each (key, counter) pair maps to an independent draw.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t bits(std::uint64_t counter) const noexcept { return hash_combine(key_, counter); }
    double uniform(std::uint64_t counter) const noexcept {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }
    /// Uniform in [-1, 1).
    double symmetric(std::uint64_t counter) const noexcept { return 2.0 * uniform(counter) - 1.0; }

private:
    std::uint64_t key_;
};

}  // namespace fairtune

#endif
