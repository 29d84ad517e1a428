#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rmt/config.hpp"
#include "rmt/parallel.hpp"
#include "rmt/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"rmt: eigenvalue statistics of random matrix products"};
    std::string verb, config_path;
    std::uint64_t seed = 0;
    std::string out;
    int trials = 0;
    app.add_option("verb", verb, "sample | kernel | density | limits | saddle-check | verify")->required();
    app.add_option("--config", config_path, "JSON config file")->required();
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    auto* out_opt = app.add_option("--out", out, "base output directory");
    auto* trials_opt = app.add_option("--trials", trials, "override the number of trials");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : rmt::exit_config;
    }

    try {
        const rmt::Verb v = rmt::parse_verb(verb);
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot read config " << config_path << "\n";
            return rmt::exit_io;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        const rmt::RunConfig cfg = rmt::parse_config(ss.str());
        rmt::RunOverrides ov;
        if (*seed_opt) ov.seed = seed;
        if (*out_opt) ov.out = out;
        if (*trials_opt) ov.trials = trials;
        ov.workers = rmt::worker_count();
        return rmt::run(v, cfg, ov, std::cerr).exit_code;
    } catch (const rmt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rmt::exit_code_for(e.error_class());
    }
}
