// chaos.hpp - chaotic spreading sequence generation.
//
// A frame's reference code is a segment of a chaotic orbit, normalized to
// unit mean-square so that every subcarrier carries equal energy.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace chaoscomm {

/// Supported one-dimensional chaotic maps.
///
/// Chebyshev2: x <- 1 - 2x^2 on [-1, 1] (default; zero-mean symmetric
///             invariant density, well suited to antipodal signaling).
/// Logistic:   x <- r x (1 - x) with r = 3.99 on (0, 1).
/// Tent:       x <- 1 - 2|x - 1/2| on (0, 1), slope 2.
enum class ChaosMap { Chebyshev2, Logistic, Tent };

const char* to_string(ChaosMap map);
ChaosMap chaos_map_from_string(const std::string& name);

/// One frame's reference/spreading chips for one user.
struct ChaoticSequence {
    std::vector<double> chips;
    int user_id = 0;
    std::uint64_t seed = 0;
};

/// One application of the map to state x.
double chaos_map_step(ChaosMap map, double x);

/// Iterates the map from an explicit initial state. `burn_in` iterations
/// are discarded, then `length` successive states are emitted (the initial
/// state itself is the first chip when burn_in == 0).
///
/// The tent map is dithered at the 2^-48 level from a stream derived from
/// `dither_seed`: exact slope-2 doubling consumes one mantissa bit per step
/// in binary floating point and every orbit would otherwise collapse to 0
/// within ~60 iterations. The dither is deterministic and far below chip
/// amplitude. Chebyshev2 and Logistic are iterated exactly.
std::vector<double> iterate_chaos(ChaosMap map, double x0, std::size_t length,
                                  int burn_in, std::uint64_t dither_seed = 0);

/// Deterministic sequence generation: the seed is scrambled into an initial
/// condition in the map's valid open interval (away from fixed points),
/// 64 burn-in iterations are discarded, and `length` chips are emitted.
/// Identical (map, seed, length) always yields identical chips.
ChaoticSequence generate_sequence(ChaosMap map, std::uint64_t seed,
                                  std::size_t length, int user_id = 0);

/// Mean of squared entries.
double mean_square(std::span<const double> v);

/// Scales the sequence to unit mean-square (so a beta-chip frame carries
/// energy exactly beta). Throws std::invalid_argument("degenerate sequence")
/// on an all-zero input.
ChaoticSequence normalize_energy(const ChaoticSequence& seq);

/// In-place variant of normalize_energy.
void normalize_energy_inplace(std::span<double> chips);

}  // namespace chaoscomm
