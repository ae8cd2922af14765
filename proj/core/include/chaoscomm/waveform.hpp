// waveform.hpp - waveform-level fidelity layer: square-root-raised-cosine
// chip shaping, subcarrier up/down conversion, matched filtering and PSD
// estimation.

#pragma once

#include <span>
#include <vector>

#include "chaoscomm/modem.hpp"

namespace chaoscomm {

/// Unit-energy square-root-raised-cosine chip pulse, sampled at
/// samples_per_chip per chip over +/- span_chips.
struct SrrcFilter {
    double rolloff = 0.25;
    int span_chips = 8;        ///< one-sided span in chip durations
    int samples_per_chip = 8;  ///< L
    std::vector<double> taps;  ///< length 2*span*L + 1, sum of squares = 1
};

/// Closed-form SRRC impulse response with the t=0 and t=+-Tc/(4 alpha)
/// singularities filled by their analytic limits, rescaled to unit energy.
SrrcFilter design_srrc(double rolloff, int span_chips, int samples_per_chip);

/// Uniform subcarrier grid f_i = f_p + i*spacing for i = 1..M with
/// spacing = (1+alpha)/Tc, so adjacent bands are exactly disjoint.
struct SubcarrierPlan {
    double fundamental_freq = 0.0;  ///< f_p
    double spacing = 0.0;           ///< (1+alpha)/Tc
    int m_subcarriers = 0;
    std::vector<double> phases;     ///< per-subcarrier carrier phase, radians
    double sample_rate = 0.0;

    double carrier_freq(int row) const { return fundamental_freq + (row + 1) * spacing; }
};

/// Builds the plan for one user. sample_rate = samples_per_chip / Tc;
/// band_offset shifts the whole grid (u * B for the u-th user of a shared
/// channel). Phases default to zero.
SubcarrierPlan subcarrier_plan(const FrameParams& params, int samples_per_chip,
                               double fundamental_freq, double band_offset = 0.0);

/// Passband Nyquist bound for the plan: 2 * (f_p + (M+1) * spacing).
double min_sample_rate(const SubcarrierPlan& plan);

/// Smallest samples-per-chip whose sample rate meets the Nyquist bound for
/// a plan built from `params` at the given fundamental frequency.
int min_samples_per_chip(const FrameParams& params, double fundamental_freq,
                         double band_offset = 0.0);

/// Throws std::runtime_error if the plan's sample rate violates the bound.
void validate_nyquist(const SubcarrierPlan& plan);

/// Precomputed cos(2 pi f_i t_n + phi_i) per subcarrier over a frame,
/// shared between shaping and matched filtering (and across frames).
struct CarrierTable {
    int rows = 0;
    int length = 0;
    std::vector<double> data;  // row-major

    std::span<const double> row(int i) const { return {data.data() + static_cast<std::size_t>(i) * length, static_cast<std::size_t>(length)}; }
};

CarrierTable make_carrier_table(const SubcarrierPlan& plan, int length);

/// Number of passband samples for a frame of `chips` chips: filter tails
/// included, (chips + 2*span) * L.
int shaped_length(int chips, const SrrcFilter& filt);

/// Pulse-shapes every row at L samples per chip, modulates row i onto
/// subcarrier i+1 and sums. Output length = shaped_length(frame.cols, filt).
std::vector<double> shape_and_modulate(const ChipFrame& frame,
                                       const SubcarrierPlan& plan,
                                       const SrrcFilter& filt);
std::vector<double> shape_and_modulate(const ChipFrame& frame,
                                       const SubcarrierPlan& plan,
                                       const SrrcFilter& filt,
                                       const CarrierTable& carriers);
void shape_and_modulate_into(std::span<double> out, const ChipFrame& frame,
                             const SubcarrierPlan& plan, const SrrcFilter& filt,
                             const CarrierTable& carriers);

/// Per subcarrier: coherent downconversion (x2 gain), SRRC matched
/// filtering and chip-instant sampling with group-delay compensation.
/// Subcarrier 1 fills P, subcarriers 2..M fill S.
ReceivedFrame matched_filter_bank(std::span<const double> samples,
                                  const SubcarrierPlan& plan,
                                  const SrrcFilter& filt,
                                  const FrameParams& params);
ReceivedFrame matched_filter_bank(std::span<const double> samples,
                                  const SubcarrierPlan& plan,
                                  const SrrcFilter& filt,
                                  const FrameParams& params,
                                  const CarrierTable& carriers);
void matched_filter_bank_into(ReceivedFrame& rx, std::span<const double> samples,
                              const SubcarrierPlan& plan, const SrrcFilter& filt,
                              const FrameParams& params, const CarrierTable& carriers);

/// dB floor reported for empty bins (exact-zero power).
inline constexpr double kPsdFloorDb = -300.0;

/// Averaged-periodogram spectral estimate, one-sided.
struct PsdEstimate {
    std::vector<double> freqs;     ///< Hz, strictly increasing
    std::vector<double> power_db;  ///< dB relative to unit power per Hz
    double resolution_bw = 0.0;    ///< Hz per bin
};

/// Welch estimate: Hann-tapered segments, 50% overlap, normalized so the
/// integrated PSD matches the input mean-square power. segment_len must be
/// a power of two >= 16 and samples must span at least two segments.
PsdEstimate estimate_psd(std::span<const double> samples, double sample_rate,
                         int segment_len);

}  // namespace chaoscomm
