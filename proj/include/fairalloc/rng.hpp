#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace fairalloc {

/**
 * Counter-based 64-bit generator keyed by a tuple of integers.
 *
 * The key (e.g. master seed, episode, agent, step) is folded through the
 * SplitMix64 finalizer, so a stream depends only on its key and never on the
 * order in which other streams were consumed. Satisfies
 * UniformRandomBitGenerator for use with <random> distributions.
 */
class KeyedRng {
public:
    using result_type = std::uint64_t;

    KeyedRng(std::initializer_list<std::uint64_t> key) {
        std::uint64_t h = 0x9E3779B97F4A7C15ULL;
        for (std::uint64_t k : key) h = mix(h ^ mix(k + 0x632BE59BD9B4E019ULL));
        state_ = h;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

/// Stream identifiers so independent uses of one seed never collide.
enum class RngStream : std::uint64_t {
    demand = 1,
    setting = 2,
    erase = 3,
    repair = 4,
    episode_seed = 5,
    experiment = 6,
};

} // namespace fairalloc
