// roughn-lab: command-line front end over the roughn C API.

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "roughn/roughn.h"

int main(int argc, char** argv) {
    rl_run_config cfg;
    rl_run_config_default(&cfg);

    std::string subcommand, params, out = ".", resume;
    CLI::App app{"Desk-scale laboratory for rough-number sieve weights and Cramer-type models"};
    app.footer(rl_usage());
    app.add_option("subcommand", subcommand, "Subcommand to run")->required();
    app.add_option("--params", params, "Parameter file (key = value lines)");
    app.add_option("--out", out, "Output directory");
    app.add_option("--seed", cfg.seed, "Random seed (ROUGHN_LAB_SEED overrides)");
    app.add_option("--workers", cfg.workers, "Worker threads; never changes results");
    app.add_option("--checkpoint-secs", cfg.checkpoint_secs, "Seconds between checkpoints (0: every unit)");
    app.add_option("--resume", resume, "Checkpoint file to resume from");
    app.add_option("--max-units", cfg.max_units, "Stop after this many work units (exit 3, resumable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (const char* env = std::getenv("ROUGHN_LAB_SEED")) {
        try {
            std::size_t used = 0;
            cfg.seed = std::stoull(env, &used);
            if (env[used] != '\0') throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            std::fprintf(stderr, "roughn-lab: ROUGHN_LAB_SEED is not an unsigned integer: '%s'\n", env);
            return 2;
        }
    }

    cfg.subcommand = subcommand.c_str();
    cfg.params_path = params.empty() ? nullptr : params.c_str();
    cfg.out_dir = out.c_str();
    cfg.resume_path = resume.empty() ? nullptr : resume.c_str();

    rl_run_info info;
    const int rc = rl_run(&cfg, &info);
    if (rc != 0) {
        std::fprintf(stderr, "roughn-lab: %s: %s\n", rl_status_name(info.status), info.message);
        if (info.partial) std::fprintf(stderr, "roughn-lab: partial outputs; checkpoint at %s\n", info.checkpoint_path);
    }
    return rc;
}
