#ifndef BKLAB_RNG_HPP
#define BKLAB_RNG_HPP

#include <cstdint>
#include <limits>

namespace bklab {

// Counter-based random streams.
//
// A stream is identified by a 64-bit key derived from (seed, stream id,
// replicate). Its k-th output is mix(key + k * gamma), the SplitMix64
// construction, so any output can be recomputed from its coordinates alone and
// results never depend on how replicates are scheduled across threads.

constexpr std::uint64_t splitmix_gamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Named streams keep independent estimators on disjoint randomness.
enum class StreamId : std::uint64_t {
    sample = 1,
    last_exit = 2,
    series = 3,
    tail = 4,
    levy_max = 5,
    levy_end = 6,
    sym_centered = 7,
    sym_star = 8,
    sym_plain = 9,
    sequential = 10,
    sym_transfer_plain = 11,
    sym_transfer_star = 12,
    moment = 13,
    median = 14,
};

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t replicate) noexcept {
    std::uint64_t k = mix64(seed + splitmix_gamma);
    k = mix64(k ^ (stream * 0xd1b54a32d192ed03ULL));
    k = mix64(k ^ (replicate * 0xaef17502108ef2d9ULL + 0x632be59bd9b4e019ULL));
    return k;
}

constexpr std::uint64_t derive_key(std::uint64_t seed, StreamId stream,
                                   std::uint64_t replicate) noexcept {
    return derive_key(seed, static_cast<std::uint64_t>(stream), replicate);
}

// Derived root seed for a sub-experiment (matrix cell, independent side of an audit).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    return mix64(seed ^ mix64(salt + 0x5851f42d4c957f2dULL));
}

// Satisfies UniformRandomBitGenerator so it can drive Boost.Random distributions.
class CounterStream {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterStream(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * splitmix_gamma);
    }

    // Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    // One fair bit; consumes 64-bit words lazily.
    bool bit() noexcept {
        if (bits_left_ == 0) {
            bits_ = (*this)();
            bits_left_ = 64;
        }
        --bits_left_;
        const bool b = (bits_ & 1U) != 0;
        bits_ >>= 1;
        return b;
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::uint64_t bits_ = 0;
    unsigned bits_left_ = 0;
};

} // namespace bklab

#endif
