#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "clab/commands.hpp"
#include "clab/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Spectral calculus, heat semigroup and Calderon distinguishability laboratory", "clab"};
    app.set_version_flag("--version", std::string(clab::kToolVersion));

    std::string command, config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool verbose = false;
    app.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(clab::command_names()));
    app.add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed, overrides the config");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::NonNegativeNumber);
    app.add_flag("--verbose", verbose, "Stage timings on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const clab::Config cfg = config_path.empty() ? clab::parse_config({{"schema_version", clab::kSchemaVersion}})
                                                     : clab::load_config(config_path);
        clab::RunOptions opt;
        if (*out_opt) opt.out_dir = out_dir;
        if (*seed_opt) opt.seed = seed;
        opt.threads = threads;
        opt.verbose = verbose;
        const auto result = clab::run_command(command, cfg, opt);
        for (const auto& c : result.report["checks"])
            std::cout << (c["pass"].get<bool>() ? "ok   " : "FAIL ") << c["name"].get<std::string>() << '\n';
        std::cout << command << ": " << (result.pass ? "pass" : "fail") << " (" << result.report["config_digest"].get<std::string>()
                  << ")\n";
        return result.pass ? 0 : 3;
    } catch (const std::exception& e) {
        std::cerr << "clab " << command << ": " << e.what() << '\n';
        return clab::exit_code_for(e);
    }
}
