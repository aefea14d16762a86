#pragma once

// Subcommands behind the clab executable. Each writes its CSV tables and a
// report.json into the output directory.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clab/config.hpp"

namespace clab {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunOptions {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0;  // 0 keeps the library default
    bool verbose = false;
};

struct RunResult {
    nlohmann::json report;
    bool pass = true;
    std::vector<std::string> outputs;  // files written, relative to the output directory
};

const std::vector<std::string>& command_names();

/// Runs one subcommand. Library errors propagate; see exit_code_for.
RunResult run_command(const std::string& name, Config config, const RunOptions& options);

/// 2 for validation, domain, resource and configuration errors; 3 for numeric
/// failures and anything unexpected.
int exit_code_for(const std::exception& e);

}  // namespace clab
