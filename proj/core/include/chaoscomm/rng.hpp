// rng.hpp - deterministic random number plumbing shared by the chaos
// generator and the AWGN channel.
//
// Every stochastic quantity in the library is drawn from a SplitMix64
// stream whose 64-bit identifier is derived from (master seed, lane,
// point, frame, branch). Streams are pure functions of their identifier,
// so results never depend on thread scheduling or worker count.

#pragma once

#include <cstdint>

namespace chaoscomm {

/// SplitMix64 finalizer: one mixing round of the 64-bit state.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Minimal 64-bit generator with full-period state walk.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 significant bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; never returns zero.
    double next_unit_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Antipodal bit in {-1, +1}.
    int next_bit_pm1() { return (next_u64() >> 63) ? +1 : -1; }

private:
    std::uint64_t state_;
};

/// Derives a child stream identifier from a master seed and up to three
/// lane values. Distinct inputs map to distinct (up to hash collision)
/// identifiers; the derivation is order-sensitive.
inline std::uint64_t substream(std::uint64_t master, std::uint64_t a,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64_mix(master ^ 0x6a09e667f3bcc909ull);
    h = splitmix64_mix(h ^ a);
    h = splitmix64_mix(h ^ b);
    h = splitmix64_mix(h ^ c);
    return h;
}

/// Standard-normal deviates from a SplitMix64 stream (Marsaglia polar
/// method). A given stream identifier always yields the same sequence.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t stream_id)
        : rng_(stream_id), spare_(0.0), has_spare_(false) {}

    double next();

private:
    SplitMix64 rng_;
    double spare_;
    bool has_spare_;
};

}  // namespace chaoscomm
