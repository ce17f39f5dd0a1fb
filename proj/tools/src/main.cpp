#include <iostream>

#include "CLI11.hpp"
#include "cftrack/cli/commands.hpp"

int main(int argc, char** argv) {
    using namespace cftrack::cli;

    CLI::App app{"cftrack: correlation-filter tracking, evaluation and benchmarking"};
    app.require_subcommand(1);

    GlobalOptions options;
    std::string out_dir;
    std::uint64_t seed = 0;
    app.add_option("--config", options.config, "INI configuration file")->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides [paths] output)");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides [run] seed)");
    app.add_flag("--trace", options.trace, "write solver_trace.csv");

    auto* track = app.add_subcommand("track", "run one-pass evaluation on a sequence");
    auto* synth = app.add_subcommand("synth", "render the synthetic sequence to disk");
    auto* selftest = app.add_subcommand("selftest", "run the oracle self-test suites");
    std::string inject;
    selftest->add_option("--inject", inject, "deliberate fault to inject (w-divisor)");
    auto* bench = app.add_subcommand("bench", "time train_filter and detect");

    // Global flags are accepted after the subcommand too.
    for (auto* sub : {track, synth, selftest, bench}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    if (*out_opt) options.out = out_dir;
    if (*seed_opt) options.seed = seed;

    if (*track) return cmd_track(options, std::cout, std::cerr);
    if (*synth) return cmd_synth(options, std::cout, std::cerr);
    if (*selftest) return cmd_selftest(options, inject, std::cout, std::cerr);
    return cmd_bench(options, std::cout, std::cerr);
}
