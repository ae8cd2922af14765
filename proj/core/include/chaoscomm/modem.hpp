// modem.hpp - DCSK and MC-DCSK framing, chip-level modulation and the
// sign-correlator decoder.
//
// Conventional DCSK sends a reference half-frame followed by +/- the same
// chips. MC-DCSK puts the reference on one subcarrier and M-1 data streams,
// all spread by the same reference, on the remaining subcarriers; the
// receiver recovers the bits in parallel as sign(P x S').

#pragma once

#include <span>
#include <vector>

#include "chaoscomm/chaos.hpp"

namespace chaoscomm {

/// Spreading factor design rule: floor(Tb*B / (M*(1+alpha))) chips per bit
/// per subcarrier. Throws if the result is below 1.
int spreading_factor(double bit_duration, double bandwidth, int m_subcarriers,
                     double rolloff);

/// The (M, beta, Tb, B, alpha, Tc) parameter bundle.
struct FrameParams {
    int m_subcarriers = 2;        ///< M >= 2 (one reference + M-1 data)
    int spreading_factor = 1;     ///< beta, chips per bit per subcarrier
    double bit_duration = 400.0;  ///< Tb, time units
    double bandwidth = 1.0;       ///< B, per-user bandwidth
    double rolloff = 0.25;        ///< alpha in [0, 1]
    double chip_duration = 0.0;   ///< Tc = Tb / beta

    /// Derives beta from (Tb, B, M, alpha) via the design rule.
    static FrameParams derive(double bit_duration, double bandwidth,
                              int m_subcarriers, double rolloff);

    /// Uses an explicit beta; it may not exceed the design-rule budget.
    static FrameParams with_explicit_beta(int beta, double bit_duration,
                                          double bandwidth, int m_subcarriers,
                                          double rolloff);

    void validate() const;
};

/// M-1 antipodal bits carried by one MC-DCSK frame.
struct BitBlock {
    std::vector<int> bits;  ///< each entry is -1 or +1
    int user_id = 0;
};

/// M x beta matrix of transmitted chips. Row 0 is the reference; row i
/// (1 <= i <= M-1) is bits[i-1] * reference.
struct ChipFrame {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major

    static ChipFrame zeros(int rows, int cols);

    std::span<double> row(int i) { return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }
    std::span<const double> row(int i) const { return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }
};

/// The receiver's matrix memories: reference branch P (length beta) and the
/// M-1 data branches S ((M-1) x beta, row-major).
struct ReceivedFrame {
    int data_rows = 0;
    int chips = 0;
    std::vector<double> p;
    std::vector<double> s;

    static ReceivedFrame zeros(int data_rows, int chips);

    std::span<double> s_row(int i) { return {s.data() + static_cast<std::size_t>(i) * chips, static_cast<std::size_t>(chips)}; }
    std::span<const double> s_row(int i) const { return {s.data() + static_cast<std::size_t>(i) * chips, static_cast<std::size_t>(chips)}; }
};

/// Decision rule: sign with the zero tie broken toward +1.
inline int sign_decision(double x) { return x >= 0.0 ? +1 : -1; }

/// Conventional DCSK frame: beta reference chips followed by bit * chips.
std::vector<double> dcsk_modulate(int bit, const ChaoticSequence& ref);

/// Correlation of the two half-frames of a 2*beta received vector.
double dcsk_statistic(std::span<const double> rx);

/// sign(sum rx[k] * rx[k+beta]); sign(0) -> +1.
int dcsk_demodulate(std::span<const double> rx);

/// Builds the M x beta chip frame: row 0 = ref, row i = bits[i-1] * ref.
ChipFrame mcdcsk_frame(const BitBlock& bits, const ChaoticSequence& ref,
                       const FrameParams& params);

/// Per-branch correlator outputs: out[i] = sum_k p[k] * s[i][k].
std::vector<double> correlator_outputs(const ReceivedFrame& rx);

/// Parallel decoder: bit i = sign(sum_k p[k] * s[i][k]); sign(0) -> +1.
BitBlock mcdcsk_decode(const ReceivedFrame& rx);

/// serial_to_parallel result: blocks of M-1 bits plus the number of +1
/// pad bits appended to complete the final block.
struct ParallelBits {
    std::vector<BitBlock> blocks;
    int pad_bits = 0;
};

/// Splits a +/-1 bitstream into consecutive groups of M-1 bits; a partial
/// final group is padded with +1.
ParallelBits serial_to_parallel(std::span<const int> bitstream, int m_subcarriers);

}  // namespace chaoscomm
