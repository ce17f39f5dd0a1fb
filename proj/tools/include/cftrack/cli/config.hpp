#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cftrack/synthetic.hpp"
#include "cftrack/tracker.hpp"

namespace cftrack::cli {

/// Unknown key, unknown section, or a value that does not parse. `key()` is
/// "section.name".
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what) : Error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct BenchConfig {
    std::vector<Grid2> grids{{16, 16}, {32, 32}, {64, 64}};
    int channels = 9;
    int repeats = 5;

    void validate() const;  // throws InvalidArgument
};

struct RunConfig {
    TrackerConfig tracker;
    SyntheticSpec synth;
    BenchConfig bench;
    std::filesystem::path sequence_dir;  // empty: generate from [synth]
    std::filesystem::path output_dir = "cftrack_out";
    std::filesystem::path feature_dir;
    std::uint64_t seed = 1;
    bool trace = false;

    void validate() const;  // numeric ranges; throws InvalidArgument
};

/// INI text: [section] headers, key = value lines, ';' or '#' comments.
RunConfig parse_config(std::istream& in);
/// Empty path returns the defaults.
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its effective value; parse_config reads it back unchanged.
void write_config(std::ostream& out, const RunConfig& config);
void save_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace cftrack::cli
