#include "cftrack/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include "cftrack/cli/config.hpp"
#include "cftrack/cli/selftest.hpp"
#include "cftrack/eval.hpp"
#include "cftrack/synthetic.hpp"

namespace cftrack::cli {

namespace fs = std::filesystem;

namespace {

RunConfig resolve(const GlobalOptions& options) {
    RunConfig config = load_config(options.config);
    if (options.out) config.output_dir = *options.out;
    if (options.seed) config.seed = *options.seed;
    if (options.trace) config.trace = true;
    return config;
}

void make_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

/// Maps library errors onto exit codes with a one-line diagnostic.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Diverged& e) {
        err << "tracker diverged: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const Error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    }
}

}  // namespace

int cmd_track(const GlobalOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunConfig config = resolve(options);
        config.validate();

        AnnotatedSequence sequence;
        if (config.sequence_dir.empty()) {
            sequence = generate_synthetic(config.synth, config.seed);
        } else {
            // Loader failures are data errors even when they surface as
            // InvalidArgument from deeper layers.
            try {
                sequence = load_sequence(config.sequence_dir, config.feature_dir);
            } catch (const InvalidArgument& e) {
                throw DataError(e.what());
            }
        }

        SolverTrace trace;
        TrackerConfig tracker = config.tracker;
        if (config.trace) tracker.trace = &trace;
        OpeResult result;
        try {
            result = run_ope(sequence, tracker);
        } catch (const InvalidArgument& e) {
            throw DataError(e.what());  // config is already validated; the sequence is at fault
        }

        make_output_dir(config.output_dir);
        write_boxes_csv(config.output_dir / "boxes.csv", result.track.boxes);
        write_decisions_csv(config.output_dir / "decisions.csv", result.track.decisions);
        write_metrics_json(config.output_dir / "metrics.json", result.metrics);
        write_curves_csv(config.output_dir / "curves.csv", result.metrics);
        save_config(config.output_dir / "effective_config.ini", config);
        if (config.trace) write_solver_trace_csv(config.output_dir / "solver_trace.csv", trace);

        out << "sequence=" << sequence.name << " frames=" << result.metrics.frames
            << " precision_at_20=" << format_number(result.metrics.precision_at_20)
            << " auc=" << format_number(result.metrics.auc)
            << " sr_at_0_5=" << format_number(result.metrics.success_rate_at_0_5)
            << " mean_cle=" << format_number(result.metrics.mean_cle) << '\n';
        return static_cast<int>(kExitOk);
    });
}

int cmd_synth(const GlobalOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = resolve(options);
        const AnnotatedSequence sequence = generate_synthetic(config.synth, config.seed);
        make_output_dir(config.output_dir);
        write_sequence(sequence, config.output_dir);
        out << "wrote " << sequence.size() << " frames to " << config.output_dir.string() << '\n';
        return static_cast<int>(kExitOk);
    });
}

int cmd_selftest(const GlobalOptions& options, const std::string& inject, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = resolve(options);
        SelftestFaults faults;
        if (inject == "w-divisor") {
            faults.w_divisor_offset = 0.5;
        } else if (!inject.empty()) {
            throw ConfigError("inject", "unknown fault '" + inject + "' (known: w-divisor)");
        }

        bool all = true;
        for (const SuiteResult& r : run_selftest_suites(config.seed, faults)) {
            out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
            all = all && r.passed;
        }
        return static_cast<int>(all ? kExitOk : kExitSelftest);
    });
}

namespace {

struct Timing {
    double mean = 0.0;
    double p95 = 0.0;
};

template <typename F>
Timing time_op(int repeats, F&& op) {
    std::vector<double> ms;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        op();
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    Timing t;
    for (double v : ms) t.mean += v;
    t.mean /= static_cast<double>(ms.size());
    const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(ms.size()))) - 1;
    t.p95 = ms[std::min(idx, ms.size() - 1)];
    return t;
}

}  // namespace

int cmd_bench(const GlobalOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = resolve(options);
        config.bench.validate();
        config.tracker.validate();
        make_output_dir(config.output_dir);
        std::ofstream csv(config.output_dir / "bench.csv");
        if (!csv) throw DataError("cannot write " + (config.output_dir / "bench.csv").string());

        auto emit = [&](const std::string& op, Grid2 g, int channels, int iterations, Timing t) {
            std::string row = op + "," + to_string(g) + "," + std::to_string(channels) + "," +
                              std::to_string(iterations) + "," + format_number(t.mean) + "," +
                              format_number(t.p95) + "\n";
            out << row;
            csv << row;
        };
        const std::string header = "op,grid,channels,iterations,ms_mean,ms_p95\n";
        out << header;
        csv << header;

        std::mt19937_64 rng(config.seed);
        std::normal_distribution<double> normal;
        const int repeats = config.bench.repeats;
        for (const Grid2& g : config.bench.grids) {
            // train_filter on random features, filter support half the window.
            FeatureStack x{g, 1, {}};
            for (int d = 0; d < config.bench.channels; ++d) {
                RealArray ch(g);
                for (double& v : ch) v = normal(rng);
                x.channels.push_back(std::move(ch));
            }
            const PenalizationMask p = make_penalization({std::max(1, g.rows / 2), std::max(1, g.cols / 2)},
                                                         config.tracker.solver.penalty_floor,
                                                         config.tracker.solver.penalty_slope);
            const DesiredResponse y = make_desired_response(g, 1.0);
            emit("train_filter", g, config.bench.channels, repeats,
                 time_op(repeats, [&] { (void)train_filter(x, y, p, config.tracker.solver); }));

            // detect on a synthetic frame whose search window maps to g cells.
            TrackerConfig tracker = config.tracker;
            tracker.max_cells = std::max({tracker.max_cells, g.rows, g.cols});
            const int cell = tracker.features.cell_size;
            const double side = std::sqrt(tracker.scale.search_padding);
            SyntheticSpec spec;
            spec.object_width = g.cols * cell / side;
            spec.object_height = g.rows * cell / side;
            spec.frame_width = static_cast<int>(std::ceil(2.0 * g.cols * cell));
            spec.frame_height = static_cast<int>(std::ceil(2.0 * g.rows * cell));
            spec.start_x = spec.frame_width / 2.0;
            spec.start_y = spec.frame_height / 2.0;
            spec.length = 1;
            const AnnotatedSequence seq = generate_synthetic(spec, config.seed);
            const Frame frame = load_frame(seq.frames.front(), tracker.features);
            const TrackerState state = initialize(frame, *seq.truth.front(), tracker);
            emit("detect", state.geometry.feature_grid, state.appearance.depth(), repeats,
                 time_op(repeats, [&] { (void)detect(state, frame, tracker); }));
        }
        return static_cast<int>(kExitOk);
    });
}

}  // namespace cftrack::cli
