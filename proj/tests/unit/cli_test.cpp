#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cftrack/cli/commands.hpp"
#include "cftrack/cli/config.hpp"
#include "cftrack/cli/selftest.hpp"
#include "cftrack/eval.hpp"
#include "reference.hpp"

using namespace cftrack;
using namespace cftrack::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path write_config_file(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "run.ini";
    std::ofstream os(p);
    os << text;
    return p;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) n += c == '\n' ? 1 : 0;
    return n;
}

}  // namespace

TEST(Config, ParsesSectionsAndKeys) {
    std::istringstream in(
        "; comment\n[features]\nbackend = grayscale\ncell_size = 2\n[solver]\nmu_init = 0.5\npenalty_mode = scalar\n"
        "[tracker]\neta_low = 0.01\n[scale]\nnum_scales = 3\n[synth]\noccluded_frames = 4, 9\n[bench]\ngrids = 8x8,16x12\n"
        "[run]\nseed = 42\n");
    const RunConfig c = parse_config(in);
    EXPECT_EQ(c.tracker.features.backend, FeatureBackend::grayscale);
    EXPECT_EQ(c.tracker.features.cell_size, 2);
    EXPECT_EQ(c.tracker.solver.mu_init, 0.5);
    EXPECT_EQ(c.tracker.solver.penalty_mode, PenaltyMode::scalar);
    EXPECT_EQ(c.tracker.update.eta_low, 0.01);
    EXPECT_EQ(c.tracker.scale.num_scales, 3);
    EXPECT_EQ(c.synth.occluded_frames, (std::vector<int>{4, 9}));
    EXPECT_EQ(c.bench.grids, (std::vector<Grid2>{{8, 8}, {16, 12}}));
    EXPECT_EQ(c.seed, 42u);
}

TEST(Config, UnknownKeyAndBadValueNameTheKey) {
    std::istringstream unknown("[solver]\nmu_intt = 1\n");
    try {
        parse_config(unknown);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "solver.mu_intt");
        EXPECT_NE(std::string(e.what()).find("solver.mu_intt"), std::string::npos);
    }
    std::istringstream bad("[tracker]\neta_high = fast\n");
    try {
        parse_config(bad);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "tracker.eta_high");
    }
    std::istringstream section("[nonsense]\nx = 1\n");
    EXPECT_THROW(parse_config(section), ConfigError);
}

TEST(Config, DumpRoundTrips) {
    RunConfig c;
    c.tracker.solver.mu_scale = 7.25;
    c.tracker.features.normalize = true;
    c.synth.occluded_frames = {1, 2, 30};
    c.sequence_dir = "/data/seq";
    c.seed = 123456789;
    std::ostringstream first;
    write_config(first, c);
    std::istringstream in(first.str());
    const RunConfig back = parse_config(in);
    std::ostringstream second;
    write_config(second, back);
    EXPECT_EQ(first.str(), second.str());
    EXPECT_EQ(back.tracker.solver.mu_scale, 7.25);
    EXPECT_EQ(back.synth.occluded_frames, c.synth.occluded_frames);
    EXPECT_EQ(back.sequence_dir, c.sequence_dir);
}

TEST(Config, ExternalBackendNeedsFeaturePath) {
    RunConfig c;
    c.tracker.features.backend = FeatureBackend::external;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(CmdTrack, SyntheticRunWritesOutputs) {
    const fs::path dir = ref::fresh_temp_dir("cli_track");
    GlobalOptions o;
    o.out = dir / "out";
    std::ostringstream out, err;
    EXPECT_EQ(cmd_track(o, out, err), kExitOk) << err.str();
    for (const char* f : {"boxes.csv", "decisions.csv", "metrics.json", "curves.csv", "effective_config.ini"}) {
        EXPECT_TRUE(fs::exists(*o.out / f)) << f;
    }
    EXPECT_FALSE(fs::exists(*o.out / "solver_trace.csv"));
    EXPECT_EQ(count_lines(slurp(*o.out / "boxes.csv")), 51);
    EXPECT_NE(out.str().find("precision_at_20="), std::string::npos);

    o.trace = true;
    EXPECT_EQ(cmd_track(o, out, err), kExitOk);
    EXPECT_TRUE(fs::exists(*o.out / "solver_trace.csv"));
    fs::remove_all(dir);
}

TEST(CmdTrack, MissingAnnotationIsDataError) {
    const fs::path dir = ref::fresh_temp_dir("cli_noanno");
    fs::create_directories(dir / "seq");
    write_image(dir / "seq" / "0001.png", Image(32, 32, 10.0));
    const fs::path cfg = write_config_file(dir, "[paths]\nsequence = " + (dir / "seq").string() + "\n");
    GlobalOptions o;
    o.config = cfg;
    o.out = dir / "out";
    std::ostringstream out, err;
    EXPECT_EQ(cmd_track(o, out, err), kExitData);
    EXPECT_NE(err.str().find("ground-truth"), std::string::npos);
    fs::remove_all(dir);
}

TEST(CmdTrack, MalformedKeyIsConfigErrorNamingKey) {
    const fs::path dir = ref::fresh_temp_dir("cli_badkey");
    const fs::path cfg = write_config_file(dir, "[tracker]\nthreshhold_high = 0.5\n");
    GlobalOptions o;
    o.config = cfg;
    std::ostringstream out, err;
    EXPECT_EQ(cmd_track(o, out, err), kExitConfig);
    EXPECT_NE(err.str().find("tracker.threshhold_high"), std::string::npos);

    const fs::path range = write_config_file(dir, "[tracker]\nthreshold_low = 0.9\n");
    o.config = range;
    EXPECT_EQ(cmd_track(o, out, err), kExitConfig);
    fs::remove_all(dir);
}

TEST(CmdSynth, FiftyFramesAndDeterministic) {
    const fs::path dir = ref::fresh_temp_dir("cli_synth");
    GlobalOptions o;
    std::ostringstream out, err;
    o.out = dir / "a";
    ASSERT_EQ(cmd_synth(o, out, err), kExitOk) << err.str();
    o.out = dir / "b";
    ASSERT_EQ(cmd_synth(o, out, err), kExitOk);

    int pngs = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
        if (e.path().extension() == ".png") {
            ++pngs;
            EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename()));
        }
    }
    EXPECT_EQ(pngs, 50);
    const std::string gt = slurp(dir / "a" / "groundtruth_rect.txt");
    EXPECT_EQ(count_lines(gt), 50);
    EXPECT_EQ(gt, slurp(dir / "b" / "groundtruth_rect.txt"));
    fs::remove_all(dir);
}

TEST(CmdTrack, TracksSequenceFromDisk) {
    const fs::path dir = ref::fresh_temp_dir("cli_disk");
    GlobalOptions o;
    std::ostringstream out, err;
    o.out = dir / "seq";
    ASSERT_EQ(cmd_synth(o, out, err), kExitOk);
    const fs::path cfg = write_config_file(dir, "[paths]\nsequence = " + (dir / "seq").string() + "\n");
    o.config = cfg;
    o.out = dir / "out";
    EXPECT_EQ(cmd_track(o, out, err), kExitOk) << err.str();
    EXPECT_NE(out.str().find("sequence=seq"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Selftest, SuitesPassAndFaultIsIsolated) {
    const auto clean = run_selftest_suites(1, {});
    ASSERT_GE(clean.size(), 4u);
    for (const auto& s : clean) EXPECT_TRUE(s.passed) << s.name << ": " << s.detail;

    const auto faulty = run_selftest_suites(1, SelftestFaults{0.5});
    for (const auto& s : faulty) {
        if (s.name == "solver-equivalence") {
            EXPECT_FALSE(s.passed);
        } else {
            EXPECT_TRUE(s.passed) << s.name;
        }
    }
}

TEST(Selftest, CommandExitCodes) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_selftest(GlobalOptions{}, "", out, err), kExitOk);
    EXPECT_GE(count_lines(out.str()), 4);
    EXPECT_EQ(cmd_selftest(GlobalOptions{}, "w-divisor", out, err), kExitSelftest);
    EXPECT_EQ(cmd_selftest(GlobalOptions{}, "bogus", out, err), kExitConfig);
}

TEST(CmdBench, OneRowPerOpAndGrid) {
    const fs::path dir = ref::fresh_temp_dir("cli_bench");
    const fs::path cfg = write_config_file(dir, "[bench]\ngrids = 8x8,16x16\nchannels = 2\nrepeats = 2\n");
    GlobalOptions o;
    o.config = cfg;
    o.out = dir / "out";
    std::ostringstream out, err;
    ASSERT_EQ(cmd_bench(o, out, err), kExitOk) << err.str();
    const std::string csv = slurp(dir / "out" / "bench.csv");
    EXPECT_EQ(csv, out.str());
    EXPECT_EQ(count_lines(csv), 5);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "op,grid,channels,iterations,ms_mean,ms_p95");
    fs::remove_all(dir);
}
