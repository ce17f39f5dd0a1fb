#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace cftrack::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitData = 2,
    kExitDiverged = 3,
    kExitSelftest = 4,
};

/// Flags shared by every command; set values override the config file.
struct GlobalOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    bool trace = false;
};

/// One-pass evaluation of one sequence. Writes boxes.csv, decisions.csv,
/// metrics.json, curves.csv and effective_config.ini (plus solver_trace.csv
/// with --trace) to the output directory.
int cmd_track(const GlobalOptions& options, std::ostream& out, std::ostream& err);

/// Renders the [synth] sequence to the output directory.
int cmd_synth(const GlobalOptions& options, std::ostream& out, std::ostream& err);

/// Runs the oracle suites. `inject` names a deliberate fault ("w-divisor")
/// or is empty.
int cmd_selftest(const GlobalOptions& options, const std::string& inject, std::ostream& out, std::ostream& err);

/// Times train_filter and detect over the [bench] grids; CSV on `out` and in
/// bench.csv.
int cmd_bench(const GlobalOptions& options, std::ostream& out, std::ostream& err);

}  // namespace cftrack::cli
