#ifndef WF_RNG_HPP
#define WF_RNG_HPP

#include <cstdint>
#include <vector>

#include "wf/errors.hpp"

namespace wf {

/// Deterministic 64-bit generator: xoshiro256** seeded through splitmix64.
/// The algorithm is pinned per release and its id is recorded in every
/// experiment report so seeds stay meaningful across machines.
class Prng {
public:
    static constexpr const char* kAlgorithmId = "xoshiro256ss/splitmix64";

    explicit Prng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform draw in [lo, hi). Throws ArgumentError unless lo < hi.
    double uniform(double lo, double hi);

    /// Uniform integer in [0, bound) via rejection, no modulo bias.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal(double mean = 0.0, double stddev = 1.0);

    std::uint64_t seed() const { return seed_; }

    /// Derives an independent generator for a named substream, so that
    /// e.g. init/shuffle/fisher streams of the same experiment seed never
    /// interleave and methods sharing a protocol prefix consume identical
    /// randomness.
    static Prng substream(std::uint64_t seed, std::uint64_t stream_id);

private:
    std::uint64_t state_[4];
    std::uint64_t seed_;
};

/// Fisher-Yates shuffle of 0..n-1. Throws ArgumentError for n == 0.
std::vector<std::uint32_t> fisher_yates_permutation(Prng& rng, std::size_t n);

} // namespace wf

#endif // WF_RNG_HPP
