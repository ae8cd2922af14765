#include "chaoscomm/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "chaoscomm/rng.hpp"
#include "chaoscomm/waveform.hpp"

namespace chaoscomm {

namespace {

// Stop conditions are evaluated at fixed batch boundaries so the frame
// count is a function of the results alone, never of scheduling.
constexpr std::int64_t kChipBatchFrames = 4096;
constexpr std::int64_t kWaveBatchFrames = 256;

struct Tally {
    std::int64_t bits = 0;
    std::int64_t errors = 0;
    Tally& operator+=(const Tally& o) {
        bits += o.bits;
        errors += o.errors;
        return *this;
    }
};

template <typename RangeFn>
Tally parallel_tally(int workers, std::int64_t begin, std::int64_t end, RangeFn&& fn) {
    const std::int64_t n = end - begin;
    if (workers <= 1 || n < 2) return fn(begin, end);

    const int w = static_cast<int>(std::min<std::int64_t>(workers, n));
    const std::int64_t chunk = (n + w - 1) / w;
    std::vector<Tally> parts(w);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (int i = 0; i < w; ++i) {
        const std::int64_t lo = begin + i * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([&parts, &fn, i, lo, hi] { parts[i] = fn(lo, hi); });
    }
    for (auto& t : threads) t.join();

    Tally total;
    for (const auto& p : parts) total += p;
    return total;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// ---------------------------------------------------------------------
// Chip-level MC-DCSK: the matched-filter-equivalent discrete model. The
// receiver branches are P = x + n and S_i = b_i x + n_i with noise
// variance n0/2 per chip.
struct ChipSim {
    const ExperimentConfig& cfg;
    std::uint64_t master;
    std::uint64_t point;
    double n0;

    Tally run(std::int64_t frame_begin, std::int64_t frame_end) const {
        const int m = cfg.params.m_subcarriers;
        const int beta = cfg.params.spreading_factor;
        const double sigma = std::sqrt(n0 / 2.0);

        Tally t;
        std::vector<double> p(beta);
        for (std::int64_t f = frame_begin; f < frame_end; ++f) {
            auto seq = generate_sequence(cfg.chaos_map,
                                         streams::frame_stream(master, streams::kReference, point, f),
                                         beta);
            normalize_energy_inplace(seq.chips);

            SplitMix64 bits(streams::frame_stream(master, streams::kBits, point, f));
            if (sigma > 0.0) {
                GaussianStream gp(streams::frame_stream(master, streams::kNoise, point, f, 0));
                for (int k = 0; k < beta; ++k) p[k] = seq.chips[k] + sigma * gp.next();
                for (int i = 1; i < m; ++i) {
                    const int b = bits.next_bit_pm1();
                    GaussianStream gi(streams::frame_stream(master, streams::kNoise, point, f, i));
                    double acc = 0.0;
                    for (int k = 0; k < beta; ++k) {
                        acc += p[k] * (b * seq.chips[k] + sigma * gi.next());
                    }
                    t.errors += (sign_decision(acc) != b);
                }
            } else {
                for (int i = 1; i < m; ++i) {
                    const int b = bits.next_bit_pm1();
                    double acc = 0.0;
                    for (int k = 0; k < beta; ++k) acc += seq.chips[k] * (b * seq.chips[k]);
                    t.errors += (sign_decision(acc) != b);
                }
            }
            t.bits += m - 1;
        }
        return t;
    }
};

// Conventional DCSK at chip level: one bit per 2*beta chips, decoded by
// correlating the two half-frames.
struct DcskSim {
    const ExperimentConfig& cfg;
    std::uint64_t master;
    std::uint64_t point;
    double n0;

    Tally run(std::int64_t frame_begin, std::int64_t frame_end) const {
        const int beta = cfg.params.spreading_factor;
        const double sigma = std::sqrt(n0 / 2.0);
        constexpr std::uint64_t kRefLane = streams::kDcsk + streams::kReference;
        constexpr std::uint64_t kBitLane = streams::kDcsk + streams::kBits;
        constexpr std::uint64_t kNoiseLane = streams::kDcsk + streams::kNoise;

        Tally t;
        for (std::int64_t f = frame_begin; f < frame_end; ++f) {
            auto seq = generate_sequence(cfg.chaos_map,
                                         streams::frame_stream(master, kRefLane, point, f), beta);
            normalize_energy_inplace(seq.chips);

            SplitMix64 bits(streams::frame_stream(master, kBitLane, point, f));
            const int b = bits.next_bit_pm1();

            auto tx = dcsk_modulate(b, seq);
            if (sigma > 0.0) {
                NoiseSpec spec{n0, streams::frame_stream(master, kNoiseLane, point, f, 0)};
                add_awgn_inplace(tx, spec);
            }
            t.errors += (dcsk_demodulate(tx) != b);
            t.bits += 1;
        }
        return t;
    }
};

// ---------------------------------------------------------------------
// Waveform-level MC-DCSK: SRRC shaping, passband carriers, AWGN on the
// sample grid, matched filter bank. Noise of two-sided density n0/2 at
// the chip-matched output corresponds to per-sample variance n0/4 under
// the x2-gain coherent receiver, i.e. a NoiseSpec of n0/2.
struct WaveformGeometry {
    SrrcFilter filt;
    SubcarrierPlan plan;
    CarrierTable table;
    int frame_len = 0;

    WaveformGeometry(const ExperimentConfig& cfg, double band_offset = 0.0) {
        const auto& w = cfg.waveform;
        const double fp = w.fundamental_freq >= 0.0 ? w.fundamental_freq
                                                    : 2.0 * cfg.params.bandwidth;
        filt = design_srrc(cfg.params.rolloff, w.span_chips, w.samples_per_chip);
        plan = subcarrier_plan(cfg.params, w.samples_per_chip, fp, band_offset);
        validate_nyquist(plan);
        frame_len = shaped_length(cfg.params.spreading_factor, filt);
        table = make_carrier_table(plan, frame_len);
    }
};

struct WaveSim {
    const ExperimentConfig& cfg;
    const WaveformGeometry& geom;
    std::uint64_t master;
    std::uint64_t point;
    double n0;

    Tally run(std::int64_t frame_begin, std::int64_t frame_end) const {
        const int m = cfg.params.m_subcarriers;
        const int beta = cfg.params.spreading_factor;

        Tally t;
        std::vector<double> tx(geom.frame_len);
        ReceivedFrame rx = ReceivedFrame::zeros(m - 1, beta);
        BitBlock block;
        block.bits.resize(m - 1);

        for (std::int64_t f = frame_begin; f < frame_end; ++f) {
            auto seq = generate_sequence(cfg.chaos_map,
                                         streams::frame_stream(master, streams::kReference, point, f),
                                         beta);
            normalize_energy_inplace(seq.chips);

            SplitMix64 bits(streams::frame_stream(master, streams::kBits, point, f));
            for (int i = 0; i < m - 1; ++i) block.bits[i] = bits.next_bit_pm1();

            const auto frame = mcdcsk_frame(block, seq, cfg.params);
            shape_and_modulate_into(tx, frame, geom.plan, geom.filt, geom.table);
            if (n0 > 0.0) {
                NoiseSpec spec{n0 / 2.0, streams::frame_stream(master, streams::kNoise, point, f, 0)};
                add_awgn_inplace(tx, spec);
            }
            matched_filter_bank_into(rx, tx, geom.plan, geom.filt, cfg.params, geom.table);
            const auto decoded = mcdcsk_decode(rx);
            for (int i = 0; i < m - 1; ++i) t.errors += (decoded.bits[i] != block.bits[i]);
            t.bits += m - 1;
        }
        return t;
    }
};

double mcdcsk_bit_energy(const FrameParams& p) {
    // Normalized chips carry energy beta per branch; Eb = beta * M/(M-1).
    const double e_branch = static_cast<double>(p.spreading_factor);
    return bit_energy(p.m_subcarriers, e_branch, e_branch);
}

BerPoint make_point(double ebn0_db, const Tally& t) {
    BerPoint pt;
    pt.ebn0_db = ebn0_db;
    pt.bits_simulated = t.bits;
    pt.bit_errors = t.errors;
    pt.ber = (t.bits > 0) ? static_cast<double>(t.errors) / static_cast<double>(t.bits) : 0.0;
    const auto ci = wilson_interval(t.errors, t.bits);
    pt.ci_low = ci.low;
    pt.ci_high = ci.high;
    return pt;
}

template <typename Sim>
BerPoint run_point_batched(const ExperimentConfig& cfg, double ebn0_db, int workers,
                           std::int64_t batch_frames, int bits_per_frame, const Sim& sim) {
    Tally total;
    std::int64_t next_frame = 0;
    for (;;) {
        const std::int64_t remaining_bits = cfg.max_bits - total.bits;
        if (remaining_bits <= 0) break;
        const std::int64_t frames =
            std::min(batch_frames, ceil_div(remaining_bits, bits_per_frame));
        total += parallel_tally(workers, next_frame, next_frame + frames,
                                [&](std::int64_t lo, std::int64_t hi) { return sim.run(lo, hi); });
        next_frame += frames;
        if (total.errors >= cfg.target_errors) break;
    }
    return make_point(ebn0_db, total);
}

}  // namespace

const char* to_string(SimModel model) {
    return model == SimModel::ChipLevel ? "chip" : "waveform";
}

SimModel sim_model_from_string(const std::string& name) {
    if (name == "chip") return SimModel::ChipLevel;
    if (name == "waveform") return SimModel::Waveform;
    throw std::invalid_argument("unknown model '" + name + "' (expected chip or waveform)");
}

void ExperimentConfig::validate() const {
    params.validate();
    if (ebn0_grid_db.empty()) throw std::invalid_argument("ebn0_grid_db must be nonempty");
    for (std::size_t i = 0; i < ebn0_grid_db.size(); ++i) {
        if (std::isnan(ebn0_grid_db[i])) throw std::invalid_argument("ebn0_grid_db must not contain NaN");
        if (i > 0 && !(ebn0_grid_db[i] > ebn0_grid_db[i - 1])) {
            throw std::invalid_argument("ebn0_grid_db must be strictly increasing");
        }
    }
    if (max_bits < 1000) throw std::invalid_argument("max_bits must be >= 1000");
    if (target_errors < 10) throw std::invalid_argument("target_errors must be >= 10");
    if (users < 1) throw std::invalid_argument("users must be >= 1");
    if (waveform.samples_per_chip < 2) throw std::invalid_argument("samples_per_chip must be >= 2");
    if (waveform.span_chips < 4) throw std::invalid_argument("span_chips must be >= 4");
}

ConfidenceInterval wilson_interval(std::int64_t errors, std::int64_t n) {
    if (n <= 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;  // 97.5th percentile
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(errors) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double bpsk_reference(double ebn0_db) {
    if (std::isinf(ebn0_db)) return ebn0_db > 0 ? 0.0 : 0.5;
    const double ratio = std::pow(10.0, ebn0_db / 10.0);
    return 0.5 * std::erfc(std::sqrt(ratio));
}

namespace streams {

std::uint64_t frame_stream(std::uint64_t master, std::uint64_t lane,
                           std::uint64_t point, std::uint64_t frame,
                           std::uint64_t branch) {
    return substream(substream(master, lane, point), frame, branch);
}

}  // namespace streams

BerPoint run_ber_point(const ExperimentConfig& cfg, double ebn0_db, int workers) {
    cfg.validate();
    if (std::isnan(ebn0_db)) throw std::invalid_argument("ebn0_db must not be NaN");

    const double n0 = calibrate_noise(ebn0_db, mcdcsk_bit_energy(cfg.params)).n0;
    const std::uint64_t point = streams::point_key(ebn0_db);
    const int bits_per_frame = cfg.params.m_subcarriers - 1;

    if (cfg.model == SimModel::ChipLevel) {
        ChipSim sim{cfg, cfg.master_seed, point, n0};
        return run_point_batched(cfg, ebn0_db, workers, kChipBatchFrames, bits_per_frame, sim);
    }
    WaveformGeometry geom(cfg);
    WaveSim sim{cfg, geom, cfg.master_seed, point, n0};
    return run_point_batched(cfg, ebn0_db, workers, kWaveBatchFrames, bits_per_frame, sim);
}

std::vector<BerPoint> run_sweep(const ExperimentConfig& cfg, int workers) {
    cfg.validate();
    std::vector<BerPoint> points;
    points.reserve(cfg.ebn0_grid_db.size());
    for (double ebn0 : cfg.ebn0_grid_db) points.push_back(run_ber_point(cfg, ebn0, workers));
    return points;
}

std::vector<BerPoint> run_dcsk_sweep(const ExperimentConfig& cfg, int workers) {
    cfg.validate();
    const double e_bit = 2.0 * cfg.params.spreading_factor;
    std::vector<BerPoint> points;
    points.reserve(cfg.ebn0_grid_db.size());
    for (double ebn0 : cfg.ebn0_grid_db) {
        const double n0 = calibrate_noise(ebn0, e_bit).n0;
        DcskSim sim{cfg, cfg.master_seed, streams::point_key(ebn0), n0};
        points.push_back(run_point_batched(cfg, ebn0, workers, kChipBatchFrames, 1, sim));
    }
    return points;
}

namespace {

std::uint64_t user_master(std::uint64_t master, int user) {
    // User 0 keeps the master seed so a single-user run is bit-identical
    // to run_sweep.
    return user == 0 ? master : substream(master, streams::kUser, static_cast<std::uint64_t>(user));
}

// Joint waveform simulation: all users on one sample grid, one shared
// noise realization, per-user reception.
std::vector<std::vector<BerPoint>> run_multiuser_waveform(const ExperimentConfig& cfg,
                                                          int workers) {
    const int users = cfg.users;
    const int m = cfg.params.m_subcarriers;
    const int beta = cfg.params.spreading_factor;
    const double e_bit = mcdcsk_bit_energy(cfg.params);

    std::vector<WaveformGeometry> geoms;
    geoms.reserve(users);
    for (int u = 0; u < users; ++u) {
        geoms.emplace_back(cfg, u * cfg.params.bandwidth);
    }
    // The top user's band is the Nyquist-critical one; its constructor
    // already validated it.

    struct UserTally {
        std::vector<Tally> per_user;
        UserTally() = default;
        explicit UserTally(int u) : per_user(u) {}
        UserTally& operator+=(const UserTally& o) {
            if (per_user.empty()) per_user.resize(o.per_user.size());
            for (std::size_t i = 0; i < o.per_user.size(); ++i) per_user[i] += o.per_user[i];
            return *this;
        }
    };

    std::vector<std::vector<BerPoint>> result(users);
    for (double ebn0 : cfg.ebn0_grid_db) {
        const double n0 = calibrate_noise(ebn0, e_bit).n0;
        const std::uint64_t point = streams::point_key(ebn0);

        auto simulate_range = [&](std::int64_t lo, std::int64_t hi) {
            UserTally t(users);
            std::vector<double> sum(geoms[0].frame_len);
            std::vector<double> tx(geoms[0].frame_len);
            ReceivedFrame rx = ReceivedFrame::zeros(m - 1, beta);
            BitBlock block;
            block.bits.resize(m - 1);
            std::vector<std::vector<int>> sent(users, std::vector<int>(m - 1));

            for (std::int64_t f = lo; f < hi; ++f) {
                std::fill(sum.begin(), sum.end(), 0.0);
                for (int u = 0; u < users; ++u) {
                    const std::uint64_t mseed = user_master(cfg.master_seed, u);
                    auto seq = generate_sequence(cfg.chaos_map,
                                                 streams::frame_stream(mseed, streams::kReference, point, f),
                                                 beta);
                    normalize_energy_inplace(seq.chips);
                    SplitMix64 bits(streams::frame_stream(mseed, streams::kBits, point, f));
                    for (int i = 0; i < m - 1; ++i) {
                        block.bits[i] = bits.next_bit_pm1();
                        sent[u][i] = block.bits[i];
                    }
                    const auto frame = mcdcsk_frame(block, seq, cfg.params);
                    shape_and_modulate_into(tx, frame, geoms[u].plan, geoms[u].filt, geoms[u].table);
                    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += tx[k];
                }
                if (n0 > 0.0) {
                    NoiseSpec spec{n0 / 2.0,
                                   streams::frame_stream(cfg.master_seed, streams::kNoise, point, f, 0)};
                    add_awgn_inplace(sum, spec);
                }
                for (int u = 0; u < users; ++u) {
                    matched_filter_bank_into(rx, sum, geoms[u].plan, geoms[u].filt, cfg.params,
                                             geoms[u].table);
                    const auto decoded = mcdcsk_decode(rx);
                    for (int i = 0; i < m - 1; ++i) {
                        t.per_user[u].errors += (decoded.bits[i] != sent[u][i]);
                    }
                    t.per_user[u].bits += m - 1;
                }
            }
            return t;
        };

        UserTally total(users);
        std::int64_t next_frame = 0;
        for (;;) {
            const std::int64_t done_bits = total.per_user[0].bits;
            const std::int64_t remaining = cfg.max_bits - done_bits;
            if (remaining <= 0) break;
            const std::int64_t frames =
                std::min(kWaveBatchFrames, ceil_div(remaining, static_cast<std::int64_t>(m - 1)));

            // Parallelize over the frame range with per-user merge.
            const std::int64_t lo = next_frame, hi = next_frame + frames;
            if (workers <= 1 || hi - lo < 2) {
                total += simulate_range(lo, hi);
            } else {
                const int w = static_cast<int>(std::min<std::int64_t>(workers, hi - lo));
                const std::int64_t chunk = (hi - lo + w - 1) / w;
                std::vector<UserTally> parts(w);
                std::vector<std::thread> threads;
                for (int i = 0; i < w; ++i) {
                    const std::int64_t a = lo + i * chunk;
                    const std::int64_t b = std::min(hi, a + chunk);
                    if (a >= b) break;
                    threads.emplace_back([&parts, &simulate_range, i, a, b] {
                        parts[i] = simulate_range(a, b);
                    });
                }
                for (auto& t : threads) t.join();
                for (const auto& p : parts) total += p;
            }
            next_frame += frames;

            std::int64_t min_errors = total.per_user[0].errors;
            for (int u = 1; u < users; ++u) min_errors = std::min(min_errors, total.per_user[u].errors);
            if (min_errors >= cfg.target_errors) break;
        }
        for (int u = 0; u < users; ++u) result[u].push_back(make_point(ebn0, total.per_user[u]));
    }
    return result;
}

}  // namespace

std::vector<std::vector<BerPoint>> run_multiuser(const ExperimentConfig& cfg, int workers) {
    cfg.validate();
    if (cfg.model == SimModel::Waveform && cfg.users > 1) {
        return run_multiuser_waveform(cfg, workers);
    }
    // Disjoint bands carry independent links at chip level.
    std::vector<std::vector<BerPoint>> result(cfg.users);
    for (int u = 0; u < cfg.users; ++u) {
        ExperimentConfig user_cfg = cfg;
        user_cfg.users = 1;
        user_cfg.master_seed = user_master(cfg.master_seed, u);
        result[u] = run_sweep(user_cfg, workers);
    }
    return result;
}

}  // namespace chaoscomm
