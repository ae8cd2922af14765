// config.hpp - experiment configuration files and run manifests.
//
// Config files are JSON objects; see README for the schema. Defaults follow
// the reference operating point (Tb = 400, B = 1, alpha = 0.25) and the
// spreading factor is derived from the design rule when not given.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "chaoscomm/montecarlo.hpp"

namespace chaoscomm::cli {

/// Raised for malformed or infeasible configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A parsed config: the experiment plus its canonical serialized form and
/// digest. The digest is a stable hash of every effective field (defaults
/// applied), identical across platforms for identical configs.
struct LoadedConfig {
    ExperimentConfig experiment;
    std::string effective_json;
    std::string digest;
};

/// Parses and validates a config file. Unknown keys are an error in strict
/// mode and are ignored otherwise. The environment variable CHAOSCOMM_SEED,
/// when set, overrides the config seed.
LoadedConfig load_config(const std::string& path, bool strict = false);

/// FNV-1a-64 hex digest of a canonical string.
std::string digest_string(const std::string& canonical);

/// Provenance record written next to every command output.
struct RunManifest {
    std::string config_digest;
    std::string tool_version;
    std::string started;   ///< UTC ISO-8601
    std::string finished;  ///< UTC ISO-8601
    std::vector<std::string> outputs;
};

std::string utc_timestamp();
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace chaoscomm::cli
