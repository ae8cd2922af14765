#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "chaoscomm/channel.hpp"
#include "chaoscomm/rng.hpp"
#include "chaoscomm/waveform.hpp"
#include "test_support.hpp"

using namespace chaoscomm;

namespace {

ChaoticSequence random_ref(std::uint64_t seed, int beta) {
    return normalize_energy(generate_sequence(ChaosMap::Chebyshev2, seed, beta));
}

BitBlock random_bits(std::uint64_t seed, int m) {
    SplitMix64 rng(seed);
    BitBlock b;
    for (int i = 0; i < m - 1; ++i) b.bits.push_back(rng.next_bit_pm1());
    return b;
}

struct Link {
    FrameParams params;
    SrrcFilter filt;
    SubcarrierPlan plan;
};

Link make_link(int m, int beta = 0) {
    Link link;
    link.params = beta > 0 ? FrameParams::with_explicit_beta(beta, 400, 1, m, 0.25)
                           : FrameParams::derive(400, 1, m, 0.25);
    const double fp = 2.0 * link.params.bandwidth;
    const int L = min_samples_per_chip(link.params, fp);
    link.filt = design_srrc(link.params.rolloff, 8, L);
    link.plan = subcarrier_plan(link.params, L, fp);
    return link;
}

double energy(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

}  // namespace

TEST_CASE("srrc taps have exactly unit energy and even symmetry") {
    for (double alpha : {0.0, 0.1, 0.25, 0.5, 1.0}) {
        const auto f = design_srrc(alpha, 8, 8);
        REQUIRE(f.taps.size() == 2u * 8 * 8 + 1);
        CHECK(energy(f.taps) == doctest::Approx(1.0).epsilon(1e-9));
        const std::size_t n = f.taps.size();
        for (std::size_t k = 0; k < n; ++k) CHECK(f.taps[k] == f.taps[n - 1 - k]);
    }
}

TEST_CASE("srrc rejects invalid design parameters") {
    CHECK_THROWS_AS(design_srrc(-0.1, 8, 8), std::invalid_argument);
    CHECK_THROWS_AS(design_srrc(1.1, 8, 8), std::invalid_argument);
    CHECK_THROWS_AS(design_srrc(0.25, 3, 8), std::invalid_argument);
    CHECK_THROWS_AS(design_srrc(0.25, 8, 1), std::invalid_argument);
}

TEST_CASE("srrc singular points are filled with finite limits") {
    // alpha = 0.25 puts t = 1/(4 alpha) = 1 chip exactly on the sample grid;
    // alpha = 0.5 puts it mid-chip.
    for (double alpha : {0.25, 0.5}) {
        const auto f = design_srrc(alpha, 8, 8);
        for (double h : f.taps) CHECK(std::isfinite(h));
    }
}

TEST_CASE("srrc self-convolution is Nyquist at chip instants (span 8)") {
    // Truncation leaves the slow 1/t sinc tail in charge at alpha = 0: the
    // chip-instant ISI floor sits near 6e-2 regardless of normalization, so
    // the 1e-3 bound applies from the operating rolloff upward.
    for (double alpha : {0.25, 0.5, 1.0}) {
        const auto f = design_srrc(alpha, 8, 8);
        CHECK(testsupport::chip_instant_isi(f.taps, 8) < 1e-3);
    }
    const auto sinc = design_srrc(0.0, 8, 8);
    CHECK(testsupport::chip_instant_isi(sinc.taps, 8) > 1e-3);  // characterization
}

TEST_CASE("subcarrier plan spacing and Nyquist validation") {
    const auto params = FrameParams::derive(400, 1, 4, 0.25);  // beta 80, Tc 5
    const auto plan = subcarrier_plan(params, 64, 2.0);
    CHECK(plan.spacing == doctest::Approx((1.0 + 0.25) / 5.0));
    CHECK(plan.sample_rate == doctest::Approx(64.0 / 5.0));
    CHECK(plan.carrier_freq(0) == doctest::Approx(2.0 + plan.spacing));
    CHECK_NOTHROW(validate_nyquist(plan));

    const auto cramped = subcarrier_plan(params, 2, 2.0);
    CHECK_THROWS_AS(validate_nyquist(cramped), std::runtime_error);

    const int lmin = min_samples_per_chip(params, 2.0);
    CHECK_NOTHROW(validate_nyquist(subcarrier_plan(params, lmin, 2.0)));
    CHECK_THROWS_AS(validate_nyquist(subcarrier_plan(params, lmin - 1, 2.0)),
                    std::runtime_error);
}

TEST_CASE("a single row of constant chips shapes into a tone at its carrier") {
    // Degenerate one-row frame (built directly; the library frames always
    // carry M >= 2 rows).
    const int beta = 64, L = 8;
    ChipFrame frame = ChipFrame::zeros(1, beta);
    for (auto& v : frame.row(0)) v = 1.0;

    SubcarrierPlan plan;
    plan.fundamental_freq = 2.0;
    plan.spacing = 1.0;
    plan.m_subcarriers = 1;
    plan.phases = {0.0};
    plan.sample_rate = 8.0;  // Tc = 1, L = 8

    const auto filt = design_srrc(0.0, 8, L);
    const auto tx = shape_and_modulate(frame, plan, filt);
    REQUIRE(static_cast<int>(tx.size()) == (beta + 16) * L);

    const auto psd = estimate_psd(tx, plan.sample_rate, 128);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < psd.power_db.size(); ++i) {
        if (psd.power_db[i] > psd.power_db[peak]) peak = i;
    }
    CHECK(std::abs(psd.freqs[peak] - plan.carrier_freq(0)) <= psd.resolution_bw);
}

TEST_CASE("zero frames shape to zero samples and back") {
    const auto link = make_link(4);
    const auto frame = ChipFrame::zeros(4, link.params.spreading_factor);
    const auto tx = shape_and_modulate(frame, link.plan, link.filt);
    for (double v : tx) CHECK(v == 0.0);

    const auto rx = matched_filter_bank(tx, link.plan, link.filt, link.params);
    for (double v : rx.p) CHECK(v == 0.0);
    for (double v : rx.s) CHECK(v == 0.0);
}

TEST_CASE("disjoint bands make signal energy additive within 2%") {
    const auto link = make_link(4);
    const int beta = link.params.spreading_factor;
    const auto ref = random_ref(31, beta);
    const auto bits = random_bits(32, 4);
    const auto frame = mcdcsk_frame(bits, ref, link.params);

    const auto total = shape_and_modulate(frame, link.plan, link.filt);

    double sum_rows = 0.0;
    for (int i = 0; i < 4; ++i) {
        ChipFrame solo = ChipFrame::zeros(4, beta);
        std::copy(frame.row(i).begin(), frame.row(i).end(), solo.row(i).begin());
        sum_rows += energy(shape_and_modulate(solo, link.plan, link.filt));
    }
    CHECK(energy(total) == doctest::Approx(sum_rows).epsilon(0.02));
}

TEST_CASE("noise-free loopback recovers the chips within 1e-2 RMS") {
    for (int m : {2, 4, 8}) {
        const auto link = make_link(m);
        const int beta = link.params.spreading_factor;
        const auto ref = random_ref(50 + m, beta);
        const auto bits = random_bits(60 + m, m);
        const auto frame = mcdcsk_frame(bits, ref, link.params);

        const auto tx = shape_and_modulate(frame, link.plan, link.filt);
        const auto rx = matched_filter_bank(tx, link.plan, link.filt, link.params);

        double err = 0.0;
        for (int k = 0; k < beta; ++k) {
            err += (rx.p[k] - frame.row(0)[k]) * (rx.p[k] - frame.row(0)[k]);
        }
        for (int i = 0; i < m - 1; ++i) {
            for (int k = 0; k < beta; ++k) {
                const double d = rx.s_row(i)[k] - frame.row(i + 1)[k];
                err += d * d;
            }
        }
        const double rms = std::sqrt(err / (static_cast<double>(m) * beta));
        CHECK(rms < 1e-2);
    }
}

TEST_CASE("noise-free loopback decodes exactly for 100 random frames") {
    for (int m : {2, 4, 8}) {
        const auto link = make_link(m);
        const int beta = link.params.spreading_factor;
        const auto table = make_carrier_table(link.plan, shaped_length(beta, link.filt));
        for (int trial = 0; trial < 100; ++trial) {
            const auto ref = random_ref(1000 + trial, beta);
            const auto bits = random_bits(2000 + trial, m);
            const auto frame = mcdcsk_frame(bits, ref, link.params);
            const auto tx = shape_and_modulate(frame, link.plan, link.filt, table);
            const auto rx = matched_filter_bank(tx, link.plan, link.filt, link.params, table);
            CHECK(mcdcsk_decode(rx).bits == bits.bits);
        }
    }
}

TEST_CASE("waveform and chip-level paths make identical noise-free decisions") {
    int frames_checked = 0;
    for (int m : {2, 4, 8, 16}) {
        const auto link = make_link(m);
        const int beta = link.params.spreading_factor;
        const auto table = make_carrier_table(link.plan, shaped_length(beta, link.filt));
        const int trials = 256;
        for (int trial = 0; trial < trials; ++trial) {
            const auto ref = random_ref(7000 + trial, beta);
            const auto bits = random_bits(9000 + trial, m);
            const auto frame = mcdcsk_frame(bits, ref, link.params);

            // chip-level path: receiver memories are the frame itself
            ReceivedFrame chip_rx = ReceivedFrame::zeros(m - 1, beta);
            std::copy(frame.row(0).begin(), frame.row(0).end(), chip_rx.p.begin());
            for (int i = 1; i < m; ++i) {
                std::copy(frame.row(i).begin(), frame.row(i).end(),
                          chip_rx.s_row(i - 1).begin());
            }
            const auto chip_bits = mcdcsk_decode(chip_rx);

            const auto tx = shape_and_modulate(frame, link.plan, link.filt, table);
            const auto wave_bits =
                mcdcsk_decode(matched_filter_bank(tx, link.plan, link.filt, link.params, table));

            CHECK(chip_bits.bits == wave_bits.bits);
            ++frames_checked;
        }
    }
    CHECK(frames_checked >= 1000);
}

TEST_CASE("adjacent-band leakage is below 1% of in-band capture") {
    const auto link = make_link(4);
    const int beta = link.params.spreading_factor;
    const auto ref = random_ref(88, beta);

    // transmit on subcarrier 2 only (frame row 1)
    ChipFrame solo = ChipFrame::zeros(4, beta);
    std::copy(ref.chips.begin(), ref.chips.end(), solo.row(1).begin());

    const auto tx = shape_and_modulate(solo, link.plan, link.filt);
    const auto rx = matched_filter_bank(tx, link.plan, link.filt, link.params);

    const double in_band = energy(rx.s_row(0));          // subcarrier 2
    const double left = energy(rx.p);                    // subcarrier 1
    const double right = energy(rx.s_row(1));            // subcarrier 3
    CHECK(in_band > 0.5 * beta);  // most of the branch energy arrives
    CHECK(left < 0.01 * in_band);
    CHECK(right < 0.01 * in_band);
}

TEST_CASE("single-user occupied bandwidth approximates M * Bc = B") {
    const auto link = make_link(4);
    const int beta = link.params.spreading_factor;
    const int hop = beta * link.filt.samples_per_chip;
    const int frames = 48;
    std::vector<double> signal(static_cast<std::size_t>(frames) * hop +
                               2 * link.filt.span_chips * link.filt.samples_per_chip);
    const auto table = make_carrier_table(link.plan, shaped_length(beta, link.filt));
    for (int f = 0; f < frames; ++f) {
        const auto ref = random_ref(300 + f, beta);
        const auto bits = random_bits(400 + f, 4);
        const auto tx = shape_and_modulate(mcdcsk_frame(bits, ref, link.params),
                                           link.plan, link.filt, table);
        for (std::size_t k = 0; k < tx.size(); ++k) signal[f * hop + k] += tx[k];
    }

    const auto psd = estimate_psd(signal, link.plan.sample_rate, 2048);
    const auto lobes = testsupport::find_lobes(psd.freqs, psd.power_db);
    REQUIRE(lobes.size() == 4);

    const double bc = link.plan.spacing;
    double occupied = 0.0;
    for (const auto& lobe : lobes) {
        CHECK(lobe.width_30db == doctest::Approx(bc).epsilon(0.35));
        occupied += lobe.width_30db;
        if (lobe.floor_db != 0.0) CHECK(lobe.peak_db - lobe.floor_db >= 20.0);
    }
    CHECK(occupied == doctest::Approx(link.params.bandwidth).epsilon(0.10));

    // lobe centers sit on the subcarrier grid
    for (std::size_t i = 0; i < lobes.size(); ++i) {
        CHECK(std::abs(lobes[i].center_freq - link.plan.carrier_freq(static_cast<int>(i))) <=
              psd.resolution_bw);
    }
}

TEST_CASE("psd of a pure tone peaks in the right bin") {
    const double fs = 100.0, f0 = 23.4375;  // bin-centered for seg 64
    std::vector<double> tone(8192);
    for (std::size_t n = 0; n < tone.size(); ++n) {
        tone[n] = std::sin(2.0 * std::acos(-1.0) * f0 * n / fs);
    }
    const auto psd = estimate_psd(tone, fs, 64);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < psd.power_db.size(); ++i) {
        if (psd.power_db[i] > psd.power_db[peak]) peak = i;
    }
    CHECK(std::abs(psd.freqs[peak] - f0) <= psd.resolution_bw);
}

TEST_CASE("psd integrates back to the signal power within 5%") {
    SUBCASE("white noise") {
        std::vector<double> noise(1 << 16, 0.0);
        add_awgn_inplace(noise, NoiseSpec{2.0, 77});  // variance 1
        const auto psd = estimate_psd(noise, 10.0, 1024);
        double integral = 0.0;
        for (double db : psd.power_db) integral += std::pow(10.0, db / 10.0) * psd.resolution_bw;
        CHECK(integral == doctest::Approx(mean_square(noise)).epsilon(0.05));
    }
    SUBCASE("tone") {
        const double fs = 64.0;
        std::vector<double> tone(1 << 15);
        for (std::size_t n = 0; n < tone.size(); ++n) {
            tone[n] = 0.7 * std::sin(2.0 * std::acos(-1.0) * 13.0 * n / fs);
        }
        const auto psd = estimate_psd(tone, fs, 512);
        double integral = 0.0;
        for (double db : psd.power_db) integral += std::pow(10.0, db / 10.0) * psd.resolution_bw;
        CHECK(integral == doctest::Approx(mean_square(tone)).epsilon(0.05));
    }
}

TEST_CASE("white-noise psd is flat within 3 dB over 100 averaged segments") {
    // ~100 segments of 512 at 50% overlap: 512 + 100*256 samples.
    std::vector<double> noise(512 + 100 * 256, 0.0);
    add_awgn_inplace(noise, NoiseSpec{2.0, 4242});
    const auto psd = estimate_psd(noise, 1.0, 512);

    // DC and Nyquist carry half density in a one-sided estimate; flatness
    // applies to the interior bins.
    double mean_db = 0.0;
    for (std::size_t i = 1; i + 1 < psd.power_db.size(); ++i) mean_db += psd.power_db[i];
    mean_db /= static_cast<double>(psd.power_db.size() - 2);
    for (std::size_t i = 1; i + 1 < psd.power_db.size(); ++i) {
        CHECK(std::abs(psd.power_db[i] - mean_db) < 3.0);
    }
}

TEST_CASE("zero signal reports the floor sentinel everywhere") {
    const std::vector<double> silence(4096, 0.0);
    const auto psd = estimate_psd(silence, 1.0, 256);
    for (double db : psd.power_db) CHECK(db == kPsdFloorDb);
}

TEST_CASE("psd input validation") {
    const std::vector<double> short_signal(100, 1.0);
    CHECK_THROWS_AS(estimate_psd(short_signal, 1.0, 256), std::invalid_argument);
    const std::vector<double> ok(4096, 1.0);
    CHECK_THROWS_AS(estimate_psd(ok, 1.0, 100), std::invalid_argument);  // not a power of two
    CHECK_THROWS_AS(estimate_psd(ok, 0.0, 256), std::invalid_argument);
    CHECK(estimate_psd(ok, 1.0, 256).freqs.size() == 129);
}

TEST_CASE("psd frequencies are strictly increasing") {
    std::vector<double> noise(4096, 0.0);
    add_awgn_inplace(noise, NoiseSpec{1.0, 5});
    const auto psd = estimate_psd(noise, 48.0, 512);
    for (std::size_t i = 1; i < psd.freqs.size(); ++i) CHECK(psd.freqs[i] > psd.freqs[i - 1]);
    CHECK(psd.resolution_bw == doctest::Approx(48.0 / 512));
}
