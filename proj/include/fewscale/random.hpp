#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fewscale {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and a counter.
/// Pure function of its arguments, so streams can be created in any order
/// on any thread.
inline constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t counter) {
    return splitmix64(parent ^ splitmix64(counter + 0x632BE59BD9B4E019ULL));
}

inline constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a,
                                           std::uint64_t b) {
    return derive_seed(derive_seed(parent, a), b);
}

// Stream tags for derive_seed.
inline constexpr std::uint64_t kStreamSplit = 0x53504C4954ULL;
inline constexpr std::uint64_t kStreamSubsampleData = 0x44415441ULL;
inline constexpr std::uint64_t kStreamSubsampleClasses = 0x434C4153ULL;
inline constexpr std::uint64_t kStreamEpisode = 0x45504953ULL;
inline constexpr std::uint64_t kStreamHeadInit = 0x48454144ULL;

/// mt19937_64 output is fully specified by the standard; the bounded
/// integer and real helpers below are written out so sampling is
/// bit-identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Moves a uniformly chosen `count`-subset of `items` to its front
    /// (partial Fisher-Yates).
    template <typename T>
    void partial_shuffle(std::span<T> items, std::size_t count) {
        const std::size_t n = items.size();
        for (std::size_t i = 0; i < count && i + 1 < n; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(items[i], items[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        partial_shuffle(std::span<T>(items), items.size());
    }

private:
    std::mt19937_64 engine_;
};

} // namespace fewscale
