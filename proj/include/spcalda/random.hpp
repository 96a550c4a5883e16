#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace spcalda {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit seed is the key. The 128-bit counter is split into a 64-bit
/// block index (advanced as numbers are drawn) and a 64-bit stream id, so
/// every (seed, stream) pair is an independent, reproducible sequence.
/// Satisfies UniformRandomBitGenerator.
class Philox4x32 {
public:
    using result_type = std::uint32_t;

    explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform integer in [0, bound) by rejection, bound >= 1.
    std::uint64_t bounded(std::uint64_t bound);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    static constexpr const char* name() { return "Philox4x32-10"; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int position_ = 4;
};

/// SplitMix64 finalizer; used to derive per-replicate seeds from a master
/// seed and a counter.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t counter);

}  // namespace spcalda
