// channel.hpp - AWGN channel, Eb/N0 calibration and energy-efficiency
// accounting.
//
// Energy units: chips are shaped by a unit-energy pulse, so one chip of
// amplitude x carries energy x^2 and a normalized beta-chip branch carries
// energy beta. All bit-energy bookkeeping below uses these units; the
// chip-level channel then adds Gaussian noise of variance n0/2 per chip,
// which reproduces the continuous matched-filter statistics exactly.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chaoscomm/modem.hpp"

namespace chaoscomm {

/// Energy split of one MC-DCSK bit.
struct EnergyReport {
    double e_data = 0.0;  ///< energy per data subcarrier per bit
    double e_ref = 0.0;   ///< reference branch energy per frame
    double e_bit = 0.0;   ///< e_data + e_ref / (M-1)
    double dbr = 0.0;     ///< e_data / e_bit
};

/// E_b = e_data + e_ref / (M-1). Throws for M < 2 or negative energies.
double bit_energy(int m_subcarriers, double e_data, double e_ref);

/// Data-energy-to-bit-energy ratio (M-1)/M. Throws for M < 2.
double dbr(int m_subcarriers);

EnergyReport energy_report(int m_subcarriers, double e_data, double e_ref);

/// Measures branch energies from an actual chip frame (row 0 = reference).
EnergyReport energy_report_from_frame(const ChipFrame& frame);

/// Two-sided noise density N0/2 plus the stream identifier that makes the
/// realization reproducible.
struct NoiseSpec {
    double n0 = 0.0;
    std::uint64_t rng_stream = 0;
};

/// n0 = e_bit / 10^(ebn0_db/10). ebn0_db = +inf yields n0 = 0 (noise off).
NoiseSpec calibrate_noise(double ebn0_db, double e_bit);

/// output = input + i.i.d. Gaussian(0, n0/2); deterministic per stream.
std::vector<double> apply_awgn(std::span<const double> signal, const NoiseSpec& spec);

/// Adds the same realization apply_awgn would, without the copy.
void add_awgn_inplace(std::span<double> signal, const NoiseSpec& spec);

}  // namespace chaoscomm
