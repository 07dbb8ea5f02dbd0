#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roughn/errors.hpp"

namespace roughn {

struct run_config {
    std::string subcommand;
    std::string params_path;  // empty: built-in defaults
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int workers = 1;
    int checkpoint_secs = 0;  // 0: checkpoint after every unit
    std::string resume_path;
    /// Work units this invocation may complete before stopping with exit 3
    /// (0: unlimited). Only the checkpointing subcommands count units.
    std::uint64_t max_units = 0;
};

struct run_result {
    int exit_code = 0;  // 0 ok, 1 failure, 2 invalid config, 3 budget exhausted
    errc code = errc::ok;
    std::string message;
    bool partial = false;
    std::string checkpoint_path;  // set when a checkpoint was left behind
    std::vector<std::string> outputs;
};

const std::vector<std::string>& subcommands();
bool supports_checkpoint(const std::string& subcommand);
std::string usage();

/// Never throws; every failure is reported through the result.
run_result run(const run_config& cfg);

int exit_code_for(errc code);

struct checkpoint {
    std::string subcommand;
    std::uint64_t fingerprint = 0;
    std::uint64_t cursor = 0;  // completed units
    std::string blob;          // subcommand aggregates and output offsets
};

/// "RLCK1", u32 subcommand length + bytes, u64 fingerprint, u64 cursor,
/// u64 blob length + bytes; little-endian. Written via rename.
void write_checkpoint(const std::string& path, const checkpoint& c);
checkpoint read_checkpoint(const std::string& path);

/// FNV-1a over the subcommand, seed and parameter-file contents.
std::uint64_t config_fingerprint(const run_config& cfg, const std::string& params_text);

} // namespace roughn
