// montecarlo.hpp - BER experiment engine: early-stopped Monte Carlo sweeps
// with Wilson confidence intervals and the coherent-BPSK reference curve.
//
// Reproducibility contract: every random quantity of a run is drawn from a
// stream keyed by (master seed, lane, grid point, frame, branch) - see
// streams below. Frames are simulated in fixed-size batches and partial
// counts are merged in frame order, so results are bit-for-bit identical
// for any worker count.

#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "chaoscomm/channel.hpp"
#include "chaoscomm/chaos.hpp"
#include "chaoscomm/modem.hpp"

namespace chaoscomm {

/// Simulation fidelity: chip-level (matched-filter equivalent) or full
/// passband waveform (SRRC shaping + subcarrier up/down conversion).
enum class SimModel { ChipLevel, Waveform };

const char* to_string(SimModel model);
SimModel sim_model_from_string(const std::string& name);

/// Waveform-model knobs. fundamental_freq < 0 selects the default 2*B.
struct WaveformSettings {
    int samples_per_chip = 8;
    double fundamental_freq = -1.0;
    int span_chips = 8;
};

struct ExperimentConfig {
    FrameParams params;
    ChaosMap chaos_map = ChaosMap::Chebyshev2;
    SimModel model = SimModel::ChipLevel;
    std::vector<double> ebn0_grid_db;  ///< strictly increasing, nonempty
    std::int64_t max_bits = 1'000'000;
    int target_errors = 100;
    std::uint64_t master_seed = 1;
    int users = 1;
    WaveformSettings waveform;

    void validate() const;
};

/// One Monte Carlo measurement with its 95% Wilson interval.
struct BerPoint {
    double ebn0_db = 0.0;
    std::int64_t bits_simulated = 0;
    std::int64_t bit_errors = 0;
    double ber = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct ConfidenceInterval {
    double low = 0.0;
    double high = 0.0;
};

/// 95% Wilson score interval for `errors` successes in `n` trials.
ConfidenceInterval wilson_interval(std::int64_t errors, std::int64_t n);

/// Coherent BPSK bound 0.5 * erfc(sqrt(Eb/N0)).
double bpsk_reference(double ebn0_db);

/// Stream-lane constants of the reproducibility contract.
namespace streams {
inline constexpr std::uint64_t kReference = 0x01;  ///< chaotic reference chips
inline constexpr std::uint64_t kBits = 0x02;       ///< payload bits
inline constexpr std::uint64_t kNoise = 0x03;      ///< channel noise
inline constexpr std::uint64_t kDcsk = 0x10;       ///< lane offset, DCSK runs
inline constexpr std::uint64_t kUser = 0x20;       ///< lane offset, user index

/// Key identifying a grid point by its Eb/N0 value (bit pattern).
inline std::uint64_t point_key(double ebn0_db) {
    return std::bit_cast<std::uint64_t>(ebn0_db);
}

/// Stream for (lane, grid point, frame, branch) under a master seed.
std::uint64_t frame_stream(std::uint64_t master, std::uint64_t lane,
                           std::uint64_t point, std::uint64_t frame,
                           std::uint64_t branch = 0);
}  // namespace streams

/// Simulates one grid point: frames (fresh reference, fresh noise) until
/// bit_errors >= target_errors or bits_simulated >= max_bits.
BerPoint run_ber_point(const ExperimentConfig& cfg, double ebn0_db, int workers = 1);

/// One BerPoint per grid value, in grid order.
std::vector<BerPoint> run_sweep(const ExperimentConfig& cfg, int workers = 1);

/// Conventional time-multiplexed DCSK (one bit per 2*beta chips), chip
/// level, using cfg.params.spreading_factor; E_b = 2*beta.
std::vector<BerPoint> run_dcsk_sweep(const ExperimentConfig& cfg, int workers = 1);

/// Multi-user run, one sweep per user (result[user][grid point]).
/// Chip level: independent links on disjoint bands. Waveform: all users'
/// passband signals are summed on a shared sample grid (user u offset by
/// u*B) before per-user reception.
std::vector<std::vector<BerPoint>> run_multiuser(const ExperimentConfig& cfg,
                                                 int workers = 1);

}  // namespace chaoscomm
