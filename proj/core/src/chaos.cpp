#include "chaoscomm/chaos.hpp"

#include <cmath>
#include <stdexcept>

#include "chaoscomm/rng.hpp"

namespace chaoscomm {

namespace {

constexpr double kLogisticR = 3.99;

// States the seeding scheme must keep away from: map fixed points plus the
// interval endpoints (all of them trap or leave the orbit degenerate).
// Chebyshev2: 1 - 2x^2 = x at x = 1/2 and x = -1; 0 maps to 1 -> -1 (trap).
// Logistic:   0 and 1 - 1/r.
// Tent:       0 and 2/3.
struct MapDomain {
    double lo, hi;
    const double* bad;
    int n_bad;
};

constexpr double kBadChebyshev[] = {-1.0, 0.0, 0.5, 1.0};
constexpr double kBadLogistic[] = {0.0, 1.0 - 1.0 / kLogisticR, 1.0};
constexpr double kBadTent[] = {0.0, 2.0 / 3.0, 1.0};

MapDomain domain_of(ChaosMap map) {
    switch (map) {
        case ChaosMap::Chebyshev2: return {-1.0, 1.0, kBadChebyshev, 4};
        case ChaosMap::Logistic: return {0.0, 1.0, kBadLogistic, 3};
        case ChaosMap::Tent: return {0.0, 1.0, kBadTent, 3};
    }
    throw std::invalid_argument("unknown chaos map");
}

constexpr double kExclusionRadius = 1e-6;
constexpr int kBurnIn = 64;

// Tent-map dither scale. Slope-2 doubling is exact in binary floating
// point, so an undithered orbit walks its dyadic start value down to 0;
// 2^-48 keeps the mantissa populated while staying ~14 decimal orders
// below chip amplitude.
constexpr double kTentDither = 0x1.0p-48;

}  // namespace

const char* to_string(ChaosMap map) {
    switch (map) {
        case ChaosMap::Chebyshev2: return "chebyshev2";
        case ChaosMap::Logistic: return "logistic";
        case ChaosMap::Tent: return "tent";
    }
    return "?";
}

ChaosMap chaos_map_from_string(const std::string& name) {
    if (name == "chebyshev2") return ChaosMap::Chebyshev2;
    if (name == "logistic") return ChaosMap::Logistic;
    if (name == "tent") return ChaosMap::Tent;
    throw std::invalid_argument("unknown chaos_map '" + name +
                                "' (expected chebyshev2, logistic or tent)");
}

double chaos_map_step(ChaosMap map, double x) {
    switch (map) {
        case ChaosMap::Chebyshev2: return 1.0 - 2.0 * x * x;
        case ChaosMap::Logistic: return kLogisticR * x * (1.0 - x);
        case ChaosMap::Tent: return 1.0 - 2.0 * std::abs(x - 0.5);
    }
    throw std::invalid_argument("unknown chaos map");
}

std::vector<double> iterate_chaos(ChaosMap map, double x0, std::size_t length,
                                  int burn_in, std::uint64_t dither_seed) {
    if (length == 0) throw std::invalid_argument("zero-length sequence request");

    const bool dither = (map == ChaosMap::Tent);
    SplitMix64 jitter(substream(dither_seed, 0x7e17));

    double x = x0;
    auto advance = [&] {
        x = chaos_map_step(map, x);
        if (dither) {
            x += (jitter.next_unit() - 0.5) * kTentDither;
            if (x < kTentDither) x = kTentDither;
            if (x > 1.0 - kTentDither) x = 1.0 - kTentDither;
        }
    };

    for (int i = 0; i < burn_in; ++i) advance();

    std::vector<double> chips(length);
    chips[0] = x;
    for (std::size_t k = 1; k < length; ++k) {
        advance();
        chips[k] = x;
    }
    return chips;
}

ChaoticSequence generate_sequence(ChaosMap map, std::uint64_t seed,
                                  std::size_t length, int user_id) {
    if (length == 0) throw std::invalid_argument("zero-length sequence request");

    const MapDomain dom = domain_of(map);
    SplitMix64 scrambler(substream(seed, 0xc4a05));

    // Affine map of a 53-bit uniform into the open valid interval, redrawn
    // while within the exclusion radius of a fixed point or endpoint. The
    // redraw loop terminates with overwhelming probability (exclusions
    // cover < 1e-5 of the interval).
    double x0 = 0.0;
    for (;;) {
        const double u = scrambler.next_unit_open();  // (0, 1]
        x0 = dom.lo + (dom.hi - dom.lo) * (0.5 + (u - 0.5) * (1.0 - 4 * kExclusionRadius));
        bool ok = true;
        for (int i = 0; i < dom.n_bad; ++i) {
            if (std::abs(x0 - dom.bad[i]) < kExclusionRadius) { ok = false; break; }
        }
        if (ok) break;
    }

    ChaoticSequence seq;
    seq.user_id = user_id;
    seq.seed = seed;
    seq.chips = iterate_chaos(map, x0, length, kBurnIn, seed);
    return seq;
}

double mean_square(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

void normalize_energy_inplace(std::span<double> chips) {
    const double ms = mean_square(chips);
    if (ms <= 0.0) throw std::invalid_argument("degenerate sequence");
    const double scale = 1.0 / std::sqrt(ms);
    for (double& x : chips) x *= scale;
}

ChaoticSequence normalize_energy(const ChaoticSequence& seq) {
    ChaoticSequence out = seq;
    normalize_energy_inplace(out.chips);
    return out;
}

}  // namespace chaoscomm
