// commands.hpp - experiment subcommands behind the CLI.
//
// Each command loads a config, runs the experiment and writes plot-ready
// CSV plus a .manifest.json provenance file. Exit codes: 0 success,
// 1 config error, 2 runtime/infeasibility error.

#pragma once

#include <string>

#include "chaoscomm/config.hpp"

namespace chaoscomm::cli {

struct CommandOptions {
    std::string config_path;
    std::string out_path;
    int workers = 0;  ///< 0 = hardware concurrency
    bool strict = false;
    int max_m = 64;   ///< dbr command only
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// BER sweep -> CSV `ebn0_db,bits,errors,ber,ci_low,ci_high,bpsk_ref`.
/// With users > 1, one file per user (".u<k>" inserted before the
/// extension for users 1..U-1; user 0 keeps the given path).
int cmd_ber(const CommandOptions& opt);

/// Energy-efficiency curve -> CSV `m,dbr` for M = 2..max_m.
int cmd_dbr(const CommandOptions& opt);

/// Multi-user transmit PSD -> CSV `freq_hz,psd_db`.
int cmd_psd(const CommandOptions& opt);

/// Paired MC-DCSK vs conventional DCSK sweep at the same spreading factor
/// -> CSV `ebn0_db,mcdcsk_ber,mcdcsk_ci_low,mcdcsk_ci_high,dcsk_ber,
/// dcsk_ci_low,dcsk_ci_high,bpsk_ref`.
int cmd_sweep_compare(const CommandOptions& opt);

}  // namespace chaoscomm::cli
