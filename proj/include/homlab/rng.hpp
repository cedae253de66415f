#pragma once

// Counter-based randomness. Every random quantity in the library is a pure
// function of (seed, tag, indices), so restricting a sample to a subwindow
// and sampling the subwindow directly give identical values.

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace homlab::rng {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// FNV-1a, used to turn short string tags into stream identifiers.
constexpr std::uint64_t tag(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t hash(std::uint64_t seed, std::initializer_list<std::uint64_t> words) noexcept {
    std::uint64_t h = mix64(seed + kGolden);
    std::uint64_t i = 1;
    for (std::uint64_t w : words) {
        h = mix64(h ^ (w + kGolden * i));
        ++i;
    }
    return h;
}

// Uniform double in [0,1) with 53 random bits.
constexpr double unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double uniform(std::uint64_t seed, std::initializer_list<std::uint64_t> words) noexcept {
    return unit(hash(seed, words));
}

// Sequential generator for code that consumes an unbounded stream
// (reference datasets, trial shuffles). Satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept {
        state_ += kGolden;
        return mix64(state_);
    }

    constexpr double next_unit() noexcept { return unit((*this)()); }

private:
    std::uint64_t state_;
};

}  // namespace homlab::rng
