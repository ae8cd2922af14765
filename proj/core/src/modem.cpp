#include "chaoscomm/modem.hpp"

#include <cmath>
#include <stdexcept>

namespace chaoscomm {

namespace {

void check_pm1(int bit) {
    if (bit != -1 && bit != +1) throw std::invalid_argument("bit must be -1 or +1");
}

}  // namespace

int spreading_factor(double bit_duration, double bandwidth, int m_subcarriers,
                     double rolloff) {
    if (bit_duration <= 0.0) throw std::invalid_argument("bit_duration must be > 0");
    if (bandwidth <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
    if (m_subcarriers < 2) throw std::invalid_argument("M must be >= 2");
    if (rolloff < 0.0 || rolloff > 1.0) throw std::invalid_argument("rolloff must be in [0, 1]");

    const double budget = bit_duration * bandwidth / (m_subcarriers * (1.0 + rolloff));
    // Snap values that are integers up to rounding noise before flooring.
    const int beta = static_cast<int>(std::floor(budget + 1e-9));
    if (beta < 1) throw std::runtime_error("bandwidth/carrier budget infeasible");
    return beta;
}

FrameParams FrameParams::derive(double bit_duration, double bandwidth,
                                int m_subcarriers, double rolloff) {
    FrameParams p;
    p.m_subcarriers = m_subcarriers;
    p.bit_duration = bit_duration;
    p.bandwidth = bandwidth;
    p.rolloff = rolloff;
    p.spreading_factor = chaoscomm::spreading_factor(bit_duration, bandwidth,
                                                     m_subcarriers, rolloff);
    p.chip_duration = bit_duration / p.spreading_factor;
    p.validate();
    return p;
}

FrameParams FrameParams::with_explicit_beta(int beta, double bit_duration,
                                            double bandwidth, int m_subcarriers,
                                            double rolloff) {
    const int budget = chaoscomm::spreading_factor(bit_duration, bandwidth,
                                                   m_subcarriers, rolloff);
    if (beta < 1) throw std::invalid_argument("spreading_factor must be >= 1");
    if (beta > budget) {
        throw std::invalid_argument(
            "spreading_factor exceeds the bandwidth budget floor(Tb*B/(M*(1+rolloff))) = " +
            std::to_string(budget));
    }
    FrameParams p;
    p.m_subcarriers = m_subcarriers;
    p.bit_duration = bit_duration;
    p.bandwidth = bandwidth;
    p.rolloff = rolloff;
    p.spreading_factor = beta;
    p.chip_duration = bit_duration / beta;
    p.validate();
    return p;
}

void FrameParams::validate() const {
    if (m_subcarriers < 2) throw std::invalid_argument("M must be >= 2");
    if (spreading_factor < 1) throw std::invalid_argument("spreading_factor must be >= 1");
    if (bit_duration <= 0.0) throw std::invalid_argument("bit_duration must be > 0");
    if (bandwidth <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
    if (rolloff < 0.0 || rolloff > 1.0) throw std::invalid_argument("rolloff must be in [0, 1]");
    if (std::abs(chip_duration * spreading_factor - bit_duration) > 1e-9 * bit_duration) {
        throw std::invalid_argument("chip_duration * spreading_factor must equal bit_duration");
    }
}

ChipFrame ChipFrame::zeros(int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("frame dimensions must be positive");
    ChipFrame f;
    f.rows = rows;
    f.cols = cols;
    f.data.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    return f;
}

ReceivedFrame ReceivedFrame::zeros(int data_rows, int chips) {
    if (data_rows < 1 || chips < 1) throw std::invalid_argument("frame dimensions must be positive");
    ReceivedFrame rx;
    rx.data_rows = data_rows;
    rx.chips = chips;
    rx.p.assign(static_cast<std::size_t>(chips), 0.0);
    rx.s.assign(static_cast<std::size_t>(data_rows) * chips, 0.0);
    return rx;
}

std::vector<double> dcsk_modulate(int bit, const ChaoticSequence& ref) {
    check_pm1(bit);
    const std::size_t beta = ref.chips.size();
    if (beta == 0) throw std::invalid_argument("empty reference sequence");
    std::vector<double> out(2 * beta);
    for (std::size_t k = 0; k < beta; ++k) {
        out[k] = ref.chips[k];
        out[k + beta] = bit * ref.chips[k];
    }
    return out;
}

double dcsk_statistic(std::span<const double> rx) {
    if (rx.size() % 2 != 0 || rx.empty()) {
        throw std::invalid_argument("received vector length must be 2*beta");
    }
    const std::size_t beta = rx.size() / 2;
    double acc = 0.0;
    for (std::size_t k = 0; k < beta; ++k) acc += rx[k] * rx[k + beta];
    return acc;
}

int dcsk_demodulate(std::span<const double> rx) {
    return sign_decision(dcsk_statistic(rx));
}

ChipFrame mcdcsk_frame(const BitBlock& bits, const ChaoticSequence& ref,
                       const FrameParams& params) {
    params.validate();
    const int m = params.m_subcarriers;
    const int beta = params.spreading_factor;
    if (static_cast<int>(bits.bits.size()) != m - 1) {
        throw std::invalid_argument("bit block must hold M-1 bits");
    }
    if (static_cast<int>(ref.chips.size()) != beta) {
        throw std::invalid_argument("reference length must equal the spreading factor");
    }

    ChipFrame f = ChipFrame::zeros(m, beta);
    auto r0 = f.row(0);
    for (int k = 0; k < beta; ++k) r0[k] = ref.chips[k];
    for (int i = 1; i < m; ++i) {
        const int b = bits.bits[i - 1];
        check_pm1(b);
        auto ri = f.row(i);
        for (int k = 0; k < beta; ++k) ri[k] = b * ref.chips[k];
    }
    return f;
}

std::vector<double> correlator_outputs(const ReceivedFrame& rx) {
    if (rx.data_rows < 1 || rx.chips < 1 ||
        static_cast<int>(rx.p.size()) != rx.chips ||
        rx.s.size() != static_cast<std::size_t>(rx.data_rows) * rx.chips) {
        throw std::invalid_argument("received frame dimensions inconsistent");
    }
    std::vector<double> out(rx.data_rows);
    for (int i = 0; i < rx.data_rows; ++i) {
        auto si = rx.s_row(i);
        double acc = 0.0;
        for (int k = 0; k < rx.chips; ++k) acc += rx.p[k] * si[k];
        out[i] = acc;
    }
    return out;
}

BitBlock mcdcsk_decode(const ReceivedFrame& rx) {
    BitBlock block;
    const auto stats = correlator_outputs(rx);
    block.bits.resize(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) block.bits[i] = sign_decision(stats[i]);
    return block;
}

ParallelBits serial_to_parallel(std::span<const int> bitstream, int m_subcarriers) {
    if (m_subcarriers < 2) throw std::invalid_argument("M must be >= 2");
    const int group = m_subcarriers - 1;

    ParallelBits out;
    BitBlock current;
    current.bits.reserve(group);
    for (int b : bitstream) {
        check_pm1(b);
        current.bits.push_back(b);
        if (static_cast<int>(current.bits.size()) == group) {
            out.blocks.push_back(std::move(current));
            current = BitBlock{};
            current.bits.reserve(group);
        }
    }
    if (!current.bits.empty()) {
        out.pad_bits = group - static_cast<int>(current.bits.size());
        current.bits.resize(group, +1);
        out.blocks.push_back(std::move(current));
    }
    return out;
}

}  // namespace chaoscomm
