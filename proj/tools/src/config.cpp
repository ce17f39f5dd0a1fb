#include "cftrack/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cftrack/eval.hpp"

namespace cftrack::cli {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
    std::string section;
    std::string key;
    Setter set;
    Getter get;
};

struct BadValue {};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

template <typename T>
T parse_number(const std::string& text) {
    const std::string s = trim(text);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw BadValue{};
    return v;
}

bool parse_bool(const std::string& text) {
    std::string s = trim(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw BadValue{};
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Grid2 parse_grid(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw BadValue{};
    return {parse_number<int>(text.substr(0, x)), parse_number<int>(text.substr(x + 1))};
}

template <typename E>
struct EnumName {
    E value;
    const char* name;
};

template <typename E, std::size_t N>
E parse_enum(const std::string& text, const EnumName<E> (&names)[N]) {
    const std::string s = trim(text);
    for (const auto& n : names) {
        if (s == n.name) return n.value;
    }
    throw BadValue{};
}

template <typename E, std::size_t N>
std::string enum_name(E v, const EnumName<E> (&names)[N]) {
    for (const auto& n : names) {
        if (n.value == v) return n.name;
    }
    return "?";
}

const EnumName<FeatureBackend> kBackends[] = {{FeatureBackend::grayscale, "grayscale"},
                                              {FeatureBackend::gradient_cells, "gradient_cells"},
                                              {FeatureBackend::external, "external"}};
const EnumName<WindowKind> kWindows[] = {{WindowKind::none, "none"}, {WindowKind::cosine, "cosine"}};
const EnumName<PenaltyMode> kPenaltyModes[] = {{PenaltyMode::elementwise, "elementwise"},
                                               {PenaltyMode::scalar, "scalar"}};

// Field builders take a generic accessor returning a reference into RunConfig.
template <typename Access>
Field real_field(std::string section, std::string key, Access access) {
    return {std::move(section), std::move(key),
            [access](RunConfig& c, const std::string& v) { access(c) = parse_number<double>(v); },
            [access](const RunConfig& c) { return format_number(access(c)); }};
}

template <typename Access>
Field int_field(std::string section, std::string key, Access access) {
    return {std::move(section), std::move(key),
            [access](RunConfig& c, const std::string& v) { access(c) = parse_number<int>(v); },
            [access](const RunConfig& c) { return std::to_string(access(c)); }};
}

template <typename Access>
Field bool_field(std::string section, std::string key, Access access) {
    return {std::move(section), std::move(key),
            [access](RunConfig& c, const std::string& v) { access(c) = parse_bool(v); },
            [access](const RunConfig& c) { return std::string(access(c) ? "true" : "false"); }};
}

template <typename Access>
Field path_field(std::string section, std::string key, Access access) {
    return {std::move(section), std::move(key),
            [access](RunConfig& c, const std::string& v) { access(c) = trim(v); },
            [access](const RunConfig& c) { return access(c).string(); }};
}

template <typename E, std::size_t N, typename Access>
Field enum_field(std::string section, std::string key, const EnumName<E> (&names)[N], Access access) {
    return {std::move(section), std::move(key),
            [access, &names](RunConfig& c, const std::string& v) { access(c) = parse_enum(v, names); },
            [access, &names](const RunConfig& c) { return enum_name(access(c), names); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        // [features]
        f.push_back(enum_field("features", "backend", kBackends, [](auto& c) -> auto& { return c.tracker.features.backend; }));
        f.push_back(int_field("features", "cell_size", [](auto& c) -> auto& { return c.tracker.features.cell_size; }));
        f.push_back(enum_field("features", "window", kWindows, [](auto& c) -> auto& { return c.tracker.features.window; }));
        f.push_back(bool_field("features", "normalize", [](auto& c) -> auto& { return c.tracker.features.normalize; }));
        // [solver]
        f.push_back(int_field("solver", "admm_iterations", [](auto& c) -> auto& { return c.tracker.solver.admm_iterations; }));
        f.push_back(real_field("solver", "mu_init", [](auto& c) -> auto& { return c.tracker.solver.mu_init; }));
        f.push_back(real_field("solver", "mu_max", [](auto& c) -> auto& { return c.tracker.solver.mu_max; }));
        f.push_back(real_field("solver", "mu_scale", [](auto& c) -> auto& { return c.tracker.solver.mu_scale; }));
        f.push_back(real_field("solver", "tolerance", [](auto& c) -> auto& { return c.tracker.solver.tolerance; }));
        f.push_back(real_field("solver", "penalty_floor", [](auto& c) -> auto& { return c.tracker.solver.penalty_floor; }));
        f.push_back(real_field("solver", "penalty_slope", [](auto& c) -> auto& { return c.tracker.solver.penalty_slope; }));
        f.push_back(real_field("solver", "sigma_factor", [](auto& c) -> auto& { return c.tracker.solver.sigma_factor; }));
        f.push_back(enum_field("solver", "penalty_mode", kPenaltyModes, [](auto& c) -> auto& { return c.tracker.solver.penalty_mode; }));
        f.push_back(bool_field("solver", "reuse_multipliers", [](auto& c) -> auto& { return c.tracker.solver.reuse_multipliers; }));
        f.push_back(int_field("solver", "threads", [](auto& c) -> auto& { return c.tracker.solver.threads; }));
        // [tracker]
        f.push_back(int_field("tracker", "update_iterations", [](auto& c) -> auto& { return c.tracker.update_iterations; }));
        f.push_back(int_field("tracker", "max_cells", [](auto& c) -> auto& { return c.tracker.max_cells; }));
        f.push_back(real_field("tracker", "threshold_high", [](auto& c) -> auto& { return c.tracker.update.threshold_high; }));
        f.push_back(real_field("tracker", "threshold_low", [](auto& c) -> auto& { return c.tracker.update.threshold_low; }));
        f.push_back(real_field("tracker", "eta_high", [](auto& c) -> auto& { return c.tracker.update.eta_high; }));
        f.push_back(real_field("tracker", "eta_low", [](auto& c) -> auto& { return c.tracker.update.eta_low; }));
        f.push_back(real_field("tracker", "gamma", [](auto& c) -> auto& { return c.tracker.update.gamma; }));
        // [scale]
        f.push_back(int_field("scale", "num_scales", [](auto& c) -> auto& { return c.tracker.scale.num_scales; }));
        f.push_back(real_field("scale", "scale_step", [](auto& c) -> auto& { return c.tracker.scale.scale_step; }));
        f.push_back(real_field("scale", "search_padding", [](auto& c) -> auto& { return c.tracker.scale.search_padding; }));
        // [paths]
        f.push_back(path_field("paths", "sequence", [](auto& c) -> auto& { return c.sequence_dir; }));
        f.push_back(path_field("paths", "output", [](auto& c) -> auto& { return c.output_dir; }));
        f.push_back(path_field("paths", "features", [](auto& c) -> auto& { return c.feature_dir; }));
        // [run]
        f.push_back({"run", "seed",
                     [](RunConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>(v); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }});
        f.push_back(bool_field("run", "trace", [](auto& c) -> auto& { return c.trace; }));
        // [synth]
        f.push_back(int_field("synth", "frame_width", [](auto& c) -> auto& { return c.synth.frame_width; }));
        f.push_back(int_field("synth", "frame_height", [](auto& c) -> auto& { return c.synth.frame_height; }));
        f.push_back(int_field("synth", "length", [](auto& c) -> auto& { return c.synth.length; }));
        f.push_back(real_field("synth", "object_width", [](auto& c) -> auto& { return c.synth.object_width; }));
        f.push_back(real_field("synth", "object_height", [](auto& c) -> auto& { return c.synth.object_height; }));
        f.push_back(real_field("synth", "start_x", [](auto& c) -> auto& { return c.synth.start_x; }));
        f.push_back(real_field("synth", "start_y", [](auto& c) -> auto& { return c.synth.start_y; }));
        f.push_back(real_field("synth", "velocity_x", [](auto& c) -> auto& { return c.synth.velocity_x; }));
        f.push_back(real_field("synth", "velocity_y", [](auto& c) -> auto& { return c.synth.velocity_y; }));
        f.push_back(real_field("synth", "scale_ramp", [](auto& c) -> auto& { return c.synth.scale_ramp; }));
        f.push_back({"synth", "occluded_frames",
                     [](RunConfig& c, const std::string& v) {
                         c.synth.occluded_frames.clear();
                         for (const auto& item : split_list(v)) c.synth.occluded_frames.push_back(parse_number<int>(item));
                     },
                     [](const RunConfig& c) {
                         std::string s;
                         for (int f : c.synth.occluded_frames) s += (s.empty() ? "" : ",") + std::to_string(f);
                         return s;
                     }});
        f.push_back(real_field("synth", "background_contrast", [](auto& c) -> auto& { return c.synth.background_contrast; }));
        f.push_back(int_field("synth", "background_cell", [](auto& c) -> auto& { return c.synth.background_cell; }));
        f.push_back(int_field("synth", "texture_cells", [](auto& c) -> auto& { return c.synth.texture_cells; }));
        f.push_back(real_field("synth", "noise_sigma", [](auto& c) -> auto& { return c.synth.noise_sigma; }));
        // [bench]
        f.push_back({"bench", "grids",
                     [](RunConfig& c, const std::string& v) {
                         c.bench.grids.clear();
                         for (const auto& item : split_list(v)) c.bench.grids.push_back(parse_grid(item));
                         if (c.bench.grids.empty()) throw BadValue{};
                     },
                     [](const RunConfig& c) {
                         std::string s;
                         for (const Grid2& g : c.bench.grids) s += (s.empty() ? "" : ",") + to_string(g);
                         return s;
                     }});
        f.push_back(int_field("bench", "channels", [](auto& c) -> auto& { return c.bench.channels; }));
        f.push_back(int_field("bench", "repeats", [](auto& c) -> auto& { return c.bench.repeats; }));
        return f;
    }();
    return table;
}

}  // namespace

void BenchConfig::validate() const {
    if (grids.empty()) throw InvalidArgument("bench.grids is empty");
    for (const Grid2& g : grids) {
        if (g.rows < 2 || g.cols < 2) throw InvalidArgument("bench grid " + to_string(g) + " must be at least 2x2");
    }
    if (channels < 1) throw InvalidArgument("bench.channels must be >= 1");
    if (repeats < 1) throw InvalidArgument("bench.repeats must be >= 1");
}

void RunConfig::validate() const {
    tracker.validate();
    if (tracker.features.backend == FeatureBackend::external && feature_dir.empty()) {
        throw InvalidArgument("features.backend = external requires paths.features");
    }
}

RunConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", "malformed config (line " + std::to_string(e.line()) + "): " + e.message());
    }

    std::map<std::string, const Field*> index;
    for (const Field& f : fields()) index[f.section + "." + f.key] = &f;

    RunConfig config;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw ConfigError(section, "config key '" + section + "' is outside any section");
        }
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            const auto it = index.find(full);
            if (it == index.end()) throw ConfigError(full, "unknown config key '" + full + "'");
            const std::string text = value.get_value<std::string>();
            try {
                it->second->set(config, text);
            } catch (const BadValue&) {
                throw ConfigError(full, "invalid value for config key '" + full + "': '" + text + "'");
            }
        }
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    if (path.empty()) return RunConfig{};
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    return parse_config(in);
}

void write_config(std::ostream& out, const RunConfig& config) {
    std::string section;
    for (const Field& f : fields()) {
        if (f.section != section) {
            out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
            section = f.section;
        }
        out << f.key << " = " << f.get(config) << '\n';
    }
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_config(out, config);
}

}  // namespace cftrack::cli
