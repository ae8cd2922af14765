#include "chaoscomm/config.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>

#include <json.hpp>

#include "chaoscomm/version.hpp"

namespace chaoscomm::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "m_subcarriers", "spreading_factor", "bit_duration", "bandwidth",
    "rolloff", "chaos_map", "model", "ebn0_grid_db", "max_bits",
    "target_errors", "seed", "users", "samples_per_chip", "fundamental_freq",
};

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

std::uint64_t seed_from_env_or(std::uint64_t fallback) {
    const char* env = std::getenv("CHAOSCOMM_SEED");
    if (env == nullptr || *env == '\0') return fallback;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') {
        throw ConfigError("CHAOSCOMM_SEED must be an unsigned integer");
    }
    return static_cast<std::uint64_t>(v);
}

}  // namespace

std::string digest_string(const std::string& canonical) {
    // FNV-1a 64: stable across platforms, cheap, and good enough to key
    // run provenance.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

LoadedConfig load_config(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    if (strict) {
        for (const auto& [key, value] : j.items()) {
            (void)value;
            if (!kKnownKeys.contains(key)) throw ConfigError("unknown config key: " + key);
        }
    }

    if (!j.contains("m_subcarriers")) throw ConfigError("missing required key m_subcarriers");

    ExperimentConfig cfg;
    try {
        const int m = get_or<int>(j, "m_subcarriers", 2);
        const double tb = get_or<double>(j, "bit_duration", 400.0);
        const double bw = get_or<double>(j, "bandwidth", 1.0);
        const double alpha = get_or<double>(j, "rolloff", 0.25);
        if (j.contains("spreading_factor")) {
            cfg.params = FrameParams::with_explicit_beta(get_or<int>(j, "spreading_factor", 1),
                                                         tb, bw, m, alpha);
        } else {
            cfg.params = FrameParams::derive(tb, bw, m, alpha);
        }
        cfg.chaos_map = chaos_map_from_string(get_or<std::string>(j, "chaos_map", "chebyshev2"));
        cfg.model = sim_model_from_string(get_or<std::string>(j, "model", "chip"));
        cfg.ebn0_grid_db = get_or<std::vector<double>>(j, "ebn0_grid_db",
                                                       {0, 2, 4, 6, 8, 10, 12, 14});
        cfg.max_bits = get_or<std::int64_t>(j, "max_bits", 1'000'000);
        cfg.target_errors = get_or<int>(j, "target_errors", 100);
        cfg.master_seed = seed_from_env_or(get_or<std::uint64_t>(j, "seed", 1));
        cfg.users = get_or<int>(j, "users", 1);
        cfg.waveform.samples_per_chip = get_or<int>(j, "samples_per_chip", 8);
        cfg.waveform.fundamental_freq = get_or<double>(j, "fundamental_freq", -1.0);
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }

    // Canonical effective form: every field after defaults and derivation,
    // serialized with sorted keys.
    json effective = {
        {"m_subcarriers", cfg.params.m_subcarriers},
        {"spreading_factor", cfg.params.spreading_factor},
        {"bit_duration", cfg.params.bit_duration},
        {"bandwidth", cfg.params.bandwidth},
        {"rolloff", cfg.params.rolloff},
        {"chaos_map", to_string(cfg.chaos_map)},
        {"model", to_string(cfg.model)},
        {"ebn0_grid_db", cfg.ebn0_grid_db},
        {"max_bits", cfg.max_bits},
        {"target_errors", cfg.target_errors},
        {"seed", cfg.master_seed},
        {"users", cfg.users},
        {"samples_per_chip", cfg.waveform.samples_per_chip},
        {"fundamental_freq", cfg.waveform.fundamental_freq},
    };

    LoadedConfig loaded;
    loaded.experiment = cfg;
    loaded.effective_json = effective.dump();
    loaded.digest = digest_string(loaded.effective_json);
    return loaded;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j = {
        {"config_digest", manifest.config_digest},
        {"tool_version", manifest.tool_version},
        {"started", manifest.started},
        {"finished", manifest.finished},
        {"outputs", manifest.outputs},
    };
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace chaoscomm::cli
