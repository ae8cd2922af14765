#include "chaoscomm/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace chaoscomm {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 complex FFT, in place. Sizes are small powers of two
// (Welch segments), so no plan caching is needed.
void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace

SrrcFilter design_srrc(double rolloff, int span_chips, int samples_per_chip) {
    if (rolloff < 0.0 || rolloff > 1.0) throw std::invalid_argument("rolloff must be in [0, 1]");
    if (span_chips < 4) throw std::invalid_argument("span_chips must be >= 4");
    if (samples_per_chip < 2) throw std::invalid_argument("samples_per_chip must be >= 2");

    SrrcFilter f;
    f.rolloff = rolloff;
    f.span_chips = span_chips;
    f.samples_per_chip = samples_per_chip;

    const int center = span_chips * samples_per_chip;
    const int n = 2 * center + 1;
    f.taps.resize(n);

    // Closed form in chip units; singular points filled with their limits.
    auto impulse = [&](double t) {
        if (std::abs(t) < 1e-12) {
            return 1.0 - rolloff + 4.0 * rolloff / kPi;
        }
        if (rolloff > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * rolloff)) < 1e-9) {
            const double a = rolloff;
            return (a / std::sqrt(2.0)) *
                   ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * a)) +
                    (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * a)));
        }
        const double num = std::sin(kPi * t * (1.0 - rolloff)) +
                           4.0 * rolloff * t * std::cos(kPi * t * (1.0 + rolloff));
        const double den = kPi * t * (1.0 - std::pow(4.0 * rolloff * t, 2));
        return num / den;
    };

    // Evaluate one side and mirror so the symmetry is exact.
    for (int k = 0; k <= center; ++k) {
        const double t = static_cast<double>(k) / samples_per_chip;
        const double h = impulse(t);
        f.taps[center + k] = h;
        f.taps[center - k] = h;
    }

    double energy = 0.0;
    for (double h : f.taps) energy += h * h;
    const double scale = 1.0 / std::sqrt(energy);
    for (double& h : f.taps) h *= scale;
    return f;
}

SubcarrierPlan subcarrier_plan(const FrameParams& params, int samples_per_chip,
                               double fundamental_freq, double band_offset) {
    params.validate();
    if (samples_per_chip < 2) throw std::invalid_argument("samples_per_chip must be >= 2");
    if (fundamental_freq < 0.0) throw std::invalid_argument("fundamental_freq must be >= 0");

    SubcarrierPlan plan;
    plan.fundamental_freq = fundamental_freq + band_offset;
    plan.spacing = (1.0 + params.rolloff) / params.chip_duration;
    plan.m_subcarriers = params.m_subcarriers;
    plan.phases.assign(params.m_subcarriers, 0.0);
    plan.sample_rate = samples_per_chip / params.chip_duration;
    return plan;
}

double min_sample_rate(const SubcarrierPlan& plan) {
    return 2.0 * (plan.fundamental_freq + (plan.m_subcarriers + 1) * plan.spacing);
}

int min_samples_per_chip(const FrameParams& params, double fundamental_freq,
                         double band_offset) {
    params.validate();
    // sample_rate = L / Tc must reach 2 * (f_p + (M+1) * spacing).
    const double need = 2.0 * ((fundamental_freq + band_offset) * params.chip_duration +
                               (params.m_subcarriers + 1) * (1.0 + params.rolloff));
    return std::max(2, static_cast<int>(std::ceil(need)));
}

void validate_nyquist(const SubcarrierPlan& plan) {
    if (plan.sample_rate < min_sample_rate(plan)) {
        throw std::runtime_error(
            "sample rate " + std::to_string(plan.sample_rate) +
            " violates the Nyquist bound " + std::to_string(min_sample_rate(plan)) +
            "; increase samples_per_chip");
    }
}

CarrierTable make_carrier_table(const SubcarrierPlan& plan, int length) {
    if (length < 1) throw std::invalid_argument("carrier table length must be positive");
    CarrierTable table;
    table.rows = plan.m_subcarriers;
    table.length = length;
    table.data.resize(static_cast<std::size_t>(table.rows) * length);
    const double dt = 1.0 / plan.sample_rate;
    for (int i = 0; i < table.rows; ++i) {
        const double f = plan.carrier_freq(i);
        const double phi = plan.phases[i];
        double* row = table.data.data() + static_cast<std::size_t>(i) * length;
        for (int n = 0; n < length; ++n) {
            row[n] = std::cos(2.0 * kPi * f * n * dt + phi);
        }
    }
    return table;
}

int shaped_length(int chips, const SrrcFilter& filt) {
    return (chips + 2 * filt.span_chips) * filt.samples_per_chip;
}

void shape_and_modulate_into(std::span<double> out, const ChipFrame& frame,
                             const SubcarrierPlan& plan, const SrrcFilter& filt,
                             const CarrierTable& carriers) {
    if (frame.rows != plan.m_subcarriers) {
        throw std::invalid_argument("frame rows must match the subcarrier count");
    }
    validate_nyquist(plan);
    const int len = shaped_length(frame.cols, filt);
    if (static_cast<int>(out.size()) != len || carriers.length < len ||
        carriers.rows != frame.rows) {
        throw std::invalid_argument("output/carrier table dimensions mismatch");
    }

    const int L = filt.samples_per_chip;
    const int ntaps = static_cast<int>(filt.taps.size());
    std::fill(out.begin(), out.end(), 0.0);

    for (int i = 0; i < frame.rows; ++i) {
        const auto chips = frame.row(i);
        const auto carrier = carriers.row(i);
        for (int k = 0; k < frame.cols; ++k) {
            const double c = chips[k];
            if (c == 0.0) continue;
            const int base = k * L;
            for (int j = 0; j < ntaps; ++j) {
                out[base + j] += c * filt.taps[j] * carrier[base + j];
            }
        }
    }
}

std::vector<double> shape_and_modulate(const ChipFrame& frame,
                                       const SubcarrierPlan& plan,
                                       const SrrcFilter& filt,
                                       const CarrierTable& carriers) {
    std::vector<double> out(shaped_length(frame.cols, filt));
    shape_and_modulate_into(out, frame, plan, filt, carriers);
    return out;
}

std::vector<double> shape_and_modulate(const ChipFrame& frame,
                                       const SubcarrierPlan& plan,
                                       const SrrcFilter& filt) {
    const auto table = make_carrier_table(plan, shaped_length(frame.cols, filt));
    return shape_and_modulate(frame, plan, filt, table);
}

void matched_filter_bank_into(ReceivedFrame& rx, std::span<const double> samples,
                              const SubcarrierPlan& plan, const SrrcFilter& filt,
                              const FrameParams& params, const CarrierTable& carriers) {
    params.validate();
    if (plan.m_subcarriers != params.m_subcarriers) {
        throw std::invalid_argument("plan/params subcarrier count mismatch");
    }
    const int beta = params.spreading_factor;
    const int len = shaped_length(beta, filt);
    if (static_cast<int>(samples.size()) != len) {
        throw std::invalid_argument("sample vector length does not match the frame geometry");
    }
    if (carriers.length < len || carriers.rows != plan.m_subcarriers) {
        throw std::invalid_argument("carrier table dimensions mismatch");
    }
    if (rx.data_rows != params.m_subcarriers - 1 || rx.chips != beta) {
        rx = ReceivedFrame::zeros(params.m_subcarriers - 1, beta);
    }

    const int L = filt.samples_per_chip;
    const int ntaps = static_cast<int>(filt.taps.size());

    // Chip k of subcarrier i: correlate against the pulse image under the
    // carrier (coherent downconversion, x2 gain, matched filter, sampling
    // at the pulse peak - the group delay is absorbed by the window base).
    for (int i = 0; i < plan.m_subcarriers; ++i) {
        const auto carrier = carriers.row(i);
        double* dst = (i == 0) ? rx.p.data() : rx.s_row(i - 1).data();
        for (int k = 0; k < beta; ++k) {
            const int base = k * L;
            double acc = 0.0;
            for (int j = 0; j < ntaps; ++j) {
                acc += samples[base + j] * filt.taps[j] * carrier[base + j];
            }
            dst[k] = 2.0 * acc;
        }
    }
}

ReceivedFrame matched_filter_bank(std::span<const double> samples,
                                  const SubcarrierPlan& plan,
                                  const SrrcFilter& filt,
                                  const FrameParams& params,
                                  const CarrierTable& carriers) {
    ReceivedFrame rx = ReceivedFrame::zeros(params.m_subcarriers - 1,
                                            params.spreading_factor);
    matched_filter_bank_into(rx, samples, plan, filt, params, carriers);
    return rx;
}

ReceivedFrame matched_filter_bank(std::span<const double> samples,
                                  const SubcarrierPlan& plan,
                                  const SrrcFilter& filt,
                                  const FrameParams& params) {
    const auto table = make_carrier_table(plan, shaped_length(params.spreading_factor, filt));
    return matched_filter_bank(samples, plan, filt, params, table);
}

PsdEstimate estimate_psd(std::span<const double> samples, double sample_rate,
                         int segment_len) {
    if (sample_rate <= 0.0) throw std::invalid_argument("sample_rate must be > 0");
    if (!is_pow2(segment_len) || segment_len < 16) {
        throw std::invalid_argument("segment_len must be a power of two >= 16");
    }
    if (static_cast<int>(samples.size()) < 2 * segment_len) {
        throw std::invalid_argument("too few samples for the requested segment length");
    }

    const int seg = segment_len;
    const int half = seg / 2;
    const int bins = half + 1;

    // Periodic Hann window.
    std::vector<double> window(seg);
    double wsq = 0.0;
    for (int n = 0; n < seg; ++n) {
        window[n] = 0.5 * (1.0 - std::cos(2.0 * kPi * n / seg));
        wsq += window[n] * window[n];
    }
    const double scale = 1.0 / (sample_rate * wsq);

    std::vector<double> power(bins, 0.0);
    std::vector<std::complex<double>> buf(seg);
    int count = 0;
    for (std::size_t start = 0; start + seg <= samples.size(); start += half) {
        for (int n = 0; n < seg; ++n) buf[n] = samples[start + n] * window[n];
        fft_radix2(buf);
        for (int b = 0; b < bins; ++b) power[b] += std::norm(buf[b]) * scale;
        ++count;
    }

    PsdEstimate psd;
    psd.resolution_bw = sample_rate / seg;
    psd.freqs.resize(bins);
    psd.power_db.resize(bins);
    for (int b = 0; b < bins; ++b) {
        double p = power[b] / count;
        if (b != 0 && b != half) p *= 2.0;  // fold the one-sided spectrum
        psd.freqs[b] = b * sample_rate / seg;
        psd.power_db[b] = (p > 1e-30) ? 10.0 * std::log10(p) : kPsdFloorDb;
    }
    return psd;
}

}  // namespace chaoscomm
