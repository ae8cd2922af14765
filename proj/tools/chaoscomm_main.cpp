// chaoscomm - link-level DCSK / MC-DCSK experiment CLI.
//
// Subcommands:
//   ber            Monte Carlo BER sweep over the configured Eb/N0 grid
//   dbr            data-energy-to-bit-energy ratio curve over M
//   psd            transmit power spectral density of a multi-user signal
//   sweep-compare  paired MC-DCSK vs conventional DCSK sweep

#include <CLI11.hpp>

#include "chaoscomm/commands.hpp"
#include "chaoscomm/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"chaoscomm - multi-carrier DCSK link simulator"};
    app.set_version_flag("--version", chaoscomm::kVersion);
    app.require_subcommand(1);

    chaoscomm::cli::CommandOptions opt;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) {
            cmd->add_option("--config", opt.config_path, "experiment config file (JSON)")
                ->required();
        }
        cmd->add_option("--out", opt.out_path, "output CSV path")->required();
        cmd->add_option("--workers", opt.workers, "worker threads (0 = hardware)");
        cmd->add_flag("--strict", opt.strict, "reject unknown config keys");
    };

    auto* ber = app.add_subcommand("ber", "run a BER sweep");
    add_common(ber, true);

    auto* dbr = app.add_subcommand("dbr", "emit the DBR curve");
    add_common(dbr, false);
    dbr->add_option("--max-m", opt.max_m, "largest subcarrier count (default 64)");

    auto* psd = app.add_subcommand("psd", "emit a transmit PSD estimate");
    add_common(psd, true);

    auto* cmp = app.add_subcommand("sweep-compare", "paired MC-DCSK vs DCSK sweep");
    add_common(cmp, true);

    CLI11_PARSE(app, argc, argv);

    if (ber->parsed()) return chaoscomm::cli::cmd_ber(opt);
    if (dbr->parsed()) return chaoscomm::cli::cmd_dbr(opt);
    if (psd->parsed()) return chaoscomm::cli::cmd_psd(opt);
    if (cmp->parsed()) return chaoscomm::cli::cmd_sweep_compare(opt);
    return chaoscomm::cli::kExitConfigError;
}
