#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace mnk {

// SplitMix64 finalizer. Used to derive independent stream seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Stream derivation: folds each tag into the master seed through splitmix64,
// so derive_seed(s, {a, b}) != derive_seed(s, {b, a}) and results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept;

// 64-bit FNV-1a, for turning identifiers into stream tags.
std::uint64_t fnv1a(std::string_view text) noexcept;

// Portable random source: std::mt19937_64 (output sequence fixed by the standard) plus
// hand-written distributions, since the std:: distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    bool bernoulli(double p) { return uniform01() < p; }

    bool coin() { return (engine_() >> 63) != 0; }

    template <typename It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace mnk
