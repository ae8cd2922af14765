#include "chaoscomm/commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <thread>

#include "chaoscomm/rng.hpp"
#include "chaoscomm/version.hpp"
#include "chaoscomm/waveform.hpp"

namespace chaoscomm::cli {

namespace {

// Shortest round-trip decimal form; locale-independent by construction.
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt(std::int64_t v) { return std::to_string(v); }

int effective_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' endings everywhere
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

std::string user_out_path(const std::string& base, int user) {
    if (user == 0) return base;
    const auto dot = base.rfind('.');
    const std::string suffix = ".u" + std::to_string(user);
    if (dot == std::string::npos || dot == 0) return base + suffix;
    return base.substr(0, dot) + suffix + base.substr(dot);
}

void write_ber_csv(const std::string& path, const std::vector<BerPoint>& points) {
    auto out = open_out(path);
    out << "ebn0_db,bits,errors,ber,ci_low,ci_high,bpsk_ref\n";
    for (const auto& p : points) {
        out << fmt(p.ebn0_db) << ',' << fmt(p.bits_simulated) << ',' << fmt(p.bit_errors)
            << ',' << fmt(p.ber) << ',' << fmt(p.ci_low) << ',' << fmt(p.ci_high) << ','
            << fmt(bpsk_reference(p.ebn0_db)) << '\n';
    }
}

template <typename Body>
int guarded_command(Body&& body) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
}

void finish_manifest(RunManifest& manifest, const std::string& out_path) {
    manifest.tool_version = kVersion;
    manifest.finished = utc_timestamp();
    write_manifest(manifest, out_path + ".manifest.json");
}

}  // namespace

int cmd_ber(const CommandOptions& opt) {
    return guarded_command([&] {
        const auto loaded = load_config(opt.config_path, opt.strict);
        const int workers = effective_workers(opt.workers);

        RunManifest manifest;
        manifest.config_digest = loaded.digest;
        manifest.started = utc_timestamp();

        if (loaded.experiment.users == 1) {
            write_ber_csv(opt.out_path, run_sweep(loaded.experiment, workers));
            manifest.outputs = {opt.out_path};
        } else {
            const auto per_user = run_multiuser(loaded.experiment, workers);
            for (std::size_t u = 0; u < per_user.size(); ++u) {
                const auto path = user_out_path(opt.out_path, static_cast<int>(u));
                write_ber_csv(path, per_user[u]);
                manifest.outputs.push_back(path);
            }
        }
        finish_manifest(manifest, opt.out_path);
    });
}

int cmd_dbr(const CommandOptions& opt) {
    return guarded_command([&] {
        if (opt.max_m < 2) throw ConfigError("max M must be >= 2");

        RunManifest manifest;
        manifest.config_digest =
            digest_string("dbr:max_m=" + std::to_string(opt.max_m));
        manifest.started = utc_timestamp();

        auto out = open_out(opt.out_path);
        out << "m,dbr\n";
        for (int m = 2; m <= opt.max_m; ++m) out << m << ',' << fmt(dbr(m)) << '\n';
        out.close();

        manifest.outputs = {opt.out_path};
        finish_manifest(manifest, opt.out_path);
    });
}

int cmd_psd(const CommandOptions& opt) {
    return guarded_command([&] {
        const auto loaded = load_config(opt.config_path, opt.strict);
        const auto& cfg = loaded.experiment;
        const auto& params = cfg.params;

        RunManifest manifest;
        manifest.config_digest = loaded.digest;
        manifest.started = utc_timestamp();

        const int L = cfg.waveform.samples_per_chip;
        const double fp = cfg.waveform.fundamental_freq >= 0.0
                              ? cfg.waveform.fundamental_freq
                              : 2.0 * params.bandwidth;
        const auto filt = design_srrc(params.rolloff, cfg.waveform.span_chips, L);

        std::vector<SubcarrierPlan> plans;
        std::vector<CarrierTable> tables;
        const int beta = params.spreading_factor;
        const int frame_len = shaped_length(beta, filt);
        for (int u = 0; u < cfg.users; ++u) {
            plans.push_back(subcarrier_plan(params, L, fp, u * params.bandwidth));
            validate_nyquist(plans.back());
            tables.push_back(make_carrier_table(plans.back(), frame_len));
        }
        const double fs = plans[0].sample_rate;

        // Enough frames for a well-averaged Welch estimate.
        constexpr int kSegment = 4096;
        const int hop = beta * L;  // frames overlap-add at the chip grid
        const int frames = static_cast<int>((64LL * kSegment + hop - 1) / hop);
        std::vector<double> signal(static_cast<std::size_t>(frames) * hop +
                                   2 * filt.span_chips * L);

        std::vector<double> tx(frame_len);
        BitBlock block;
        block.bits.resize(params.m_subcarriers - 1);
        for (int u = 0; u < cfg.users; ++u) {
            const std::uint64_t mseed =
                u == 0 ? cfg.master_seed : substream(cfg.master_seed, streams::kUser, u);
            for (int f = 0; f < frames; ++f) {
                auto seq = generate_sequence(cfg.chaos_map,
                                             streams::frame_stream(mseed, streams::kReference, 0, f),
                                             beta, u);
                normalize_energy_inplace(seq.chips);
                SplitMix64 bits(streams::frame_stream(mseed, streams::kBits, 0, f));
                for (auto& b : block.bits) b = bits.next_bit_pm1();
                const auto frame = mcdcsk_frame(block, seq, params);
                shape_and_modulate_into(tx, frame, plans[u], filt, tables[u]);
                const std::size_t base = static_cast<std::size_t>(f) * hop;
                for (int k = 0; k < frame_len; ++k) signal[base + k] += tx[k];
            }
        }

        const auto psd = estimate_psd(signal, fs, kSegment);
        auto out = open_out(opt.out_path);
        out << "freq_hz,psd_db\n";
        for (std::size_t i = 0; i < psd.freqs.size(); ++i) {
            out << fmt(psd.freqs[i]) << ',' << fmt(psd.power_db[i]) << '\n';
        }
        out.close();

        manifest.outputs = {opt.out_path};
        finish_manifest(manifest, opt.out_path);
    });
}

int cmd_sweep_compare(const CommandOptions& opt) {
    return guarded_command([&] {
        const auto loaded = load_config(opt.config_path, opt.strict);
        const int workers = effective_workers(opt.workers);

        RunManifest manifest;
        manifest.config_digest = loaded.digest;
        manifest.started = utc_timestamp();

        const auto mc = run_sweep(loaded.experiment, workers);
        const auto dcsk = run_dcsk_sweep(loaded.experiment, workers);

        auto out = open_out(opt.out_path);
        out << "ebn0_db,mcdcsk_ber,mcdcsk_ci_low,mcdcsk_ci_high,"
               "dcsk_ber,dcsk_ci_low,dcsk_ci_high,bpsk_ref\n";
        for (std::size_t i = 0; i < mc.size(); ++i) {
            out << fmt(mc[i].ebn0_db) << ',' << fmt(mc[i].ber) << ',' << fmt(mc[i].ci_low)
                << ',' << fmt(mc[i].ci_high) << ',' << fmt(dcsk[i].ber) << ','
                << fmt(dcsk[i].ci_low) << ',' << fmt(dcsk[i].ci_high) << ','
                << fmt(bpsk_reference(mc[i].ebn0_db)) << '\n';
        }
        out.close();

        manifest.outputs = {opt.out_path};
        finish_manifest(manifest, opt.out_path);
    });
}

}  // namespace chaoscomm::cli
