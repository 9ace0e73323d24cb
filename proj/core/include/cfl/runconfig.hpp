#pragma once

#include <cstdint>
#include <string>

#include "cfl/protocol.hpp"

namespace cfl {

// A parsed config file: the run parameters plus optional output/baseline
// paths. Paths are resolved by the caller (the CLI), not the library.
struct ConfigFile {
    RunConfig run;
    std::string out_csv;
    std::string out_summary;
    std::string baseline_path;
};

// Strict parse: the schema mirrors RunConfig, unknown keys are rejected, and
// every error message names the offending field path. Fields left out keep
// their defaults (the reference device table and rates).
ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::string& path);

// Canonical serialization: fixed key order with defaults filled in, suitable
// for --dump-config and as the config-hash input.
std::string config_to_json(const RunConfig& cfg);

// Hash over the canonical form with execution hints (worker count, baseline
// text, theta recording) normalized away, so it identifies the experiment,
// not the invocation.
std::uint64_t config_hash(const RunConfig& cfg);

} // namespace cfl
