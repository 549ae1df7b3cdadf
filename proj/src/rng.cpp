#include "wf/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace wf {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Prng::Prng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
        word = splitmix64(sm);
    }
}

std::uint64_t Prng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Prng::uniform(double lo, double hi) {
    if (!(lo < hi)) {
        throw ArgumentError("Prng::uniform requires lo < hi");
    }
    // 53 high bits give a uniform double in [0, 1).
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    double v = lo + u * (hi - lo);
    if (v >= hi) v = std::nextafter(hi, lo); // guard against round-up at the edge
    return v;
}

std::uint64_t Prng::below(std::uint64_t bound) {
    if (bound == 0) {
        throw ArgumentError("Prng::below requires bound > 0");
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

double Prng::normal(double mean, double stddev) {
    // Box-Muller without caching the second variate: two draws per call keeps
    // the consumed-stream length a pure function of the call count.
    const double u1 = uniform(std::numeric_limits<double>::min(), 1.0);
    const double u2 = uniform(0.0, 1.0);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

Prng Prng::substream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t sm = stream_id;
    const std::uint64_t salt = splitmix64(sm);
    return Prng(seed ^ salt);
}

std::vector<std::uint32_t> fisher_yates_permutation(Prng& rng, std::size_t n) {
    if (n == 0) {
        throw ArgumentError("fisher_yates_permutation requires n >= 1");
    }
    std::vector<std::uint32_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = static_cast<std::uint32_t>(i);
    }
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

} // namespace wf
