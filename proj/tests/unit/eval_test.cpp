#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cftrack/eval.hpp"
#include "cftrack/synthetic.hpp"
#include "reference.hpp"

using namespace cftrack;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

// Intersection of two boxes by clipping each axis.
double clip_iou(const BoxRect& a, const BoxRect& b) {
    const double ix = std::max(0.0, std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y));
    const double inter = ix * iy;
    return inter / (a.width * a.height + b.width * b.height - inter);
}

}  // namespace

TEST(CenterError, IdenticalAndThreeFourFive) {
    const std::vector<BoxRect> boxes{{0, 0, 10, 10}, {5, 5, 4, 4}};
    const std::vector<std::optional<BoxRect>> same{boxes[0], boxes[1]};
    const CenterErrors e0 = center_error(boxes, same);
    EXPECT_EQ(e0.mean, 0.0);
    EXPECT_EQ(*e0.per_frame[0], 0.0);

    const std::vector<std::optional<BoxRect>> offset{BoxRect{3, 4, 10, 10}, std::nullopt};
    const CenterErrors e1 = center_error(boxes, offset);
    EXPECT_EQ(*e1.per_frame[0], 5.0);
    EXPECT_FALSE(e1.per_frame[1]);
    EXPECT_EQ(e1.valid, 1u);
    EXPECT_EQ(e1.mean, 5.0);
}

TEST(CenterError, RandomBoxesMatchFormula) {
    ref::Rng rng(81);
    std::uniform_real_distribution<double> u(0, 100);
    std::vector<BoxRect> a;
    std::vector<std::optional<BoxRect>> b;
    for (int i = 0; i < 40; ++i) {
        a.push_back({u(rng), u(rng), 1 + u(rng), 1 + u(rng)});
        b.push_back(BoxRect{u(rng), u(rng), 1 + u(rng), 1 + u(rng)});
    }
    const CenterErrors e = center_error(a, b);
    double sum = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double dx = (a[i].x + a[i].width / 2) - (b[i]->x + b[i]->width / 2);
        const double dy = (a[i].y + a[i].height / 2) - (b[i]->y + b[i]->height / 2);
        EXPECT_NEAR(*e.per_frame[static_cast<std::size_t>(i)], std::sqrt(dx * dx + dy * dy), 1e-12);
        sum += std::sqrt(dx * dx + dy * dy);
    }
    EXPECT_NEAR(e.mean, sum / 40, 1e-12);
    a.pop_back();
    EXPECT_THROW(center_error(a, b), InvalidArgument);
}

TEST(Overlap, IdenticalDisjointHalfShiftAndRandom) {
    const BoxRect a{10, 20, 8, 6};
    EXPECT_EQ(intersection_over_union(a, a), 1.0);
    EXPECT_EQ(intersection_over_union(a, {100, 100, 5, 5}), 0.0);
    EXPECT_NEAR(intersection_over_union(a, {14, 20, 8, 6}), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(intersection_over_union(a, {14, 20, 8, 6}), clip_iou(a, {14, 20, 8, 6}), 1e-15);

    ref::Rng rng(82);
    std::uniform_real_distribution<double> u(0, 50);
    for (int i = 0; i < 200; ++i) {
        const BoxRect p{u(rng), u(rng), 1 + u(rng), 1 + u(rng)};
        const BoxRect q{u(rng), u(rng), 1 + u(rng), 1 + u(rng)};
        EXPECT_NEAR(intersection_over_union(p, q), clip_iou(p, q), 1e-12);
    }
}

TEST(PrecisionCurve, Extremes) {
    const std::vector<double> zeros(7, 0.0);
    const PrecisionCurve c0 = precision_curve(zeros);
    ASSERT_EQ(c0.values.size(), 51u);
    for (double v : c0.values) EXPECT_EQ(v, 1.0);
    EXPECT_EQ(c0.score_at_20, 1.0);

    const std::vector<double> far(5, 100.0);
    for (double v : precision_curve(far).values) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(precision_curve(std::vector<double>{}), InvalidArgument);
}

TEST(PrecisionCurve, DirectCounting) {
    const std::vector<double> e{5, 15, 25, 45};
    const PrecisionCurve c = precision_curve(e);
    EXPECT_EQ(c.score_at_20, 0.5);
    for (int t = 0; t <= 50; ++t) {
        int count = 0;
        for (double v : e) count += v <= t ? 1 : 0;
        EXPECT_EQ(c.values[static_cast<std::size_t>(t)], count / 4.0);
        EXPECT_EQ(c.thresholds[static_cast<std::size_t>(t)], t);
    }
}

TEST(SuccessCurve, ExtremesAndDirectCounting) {
    const std::vector<double> ones(3, 1.0);
    EXPECT_DOUBLE_EQ(success_curve(ones).auc, 50.0 / 51.0);
    const std::vector<double> zeros(3, 0.0);
    EXPECT_EQ(success_curve(zeros).auc, 0.0);

    const std::vector<double> o{0.25, 0.75};
    const SuccessCurve c = success_curve(o);
    ASSERT_EQ(c.values.size(), 51u);
    double sum = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double t = i / 50.0;
        int count = 0;
        for (double v : o) count += v > t ? 1 : 0;
        EXPECT_EQ(c.values[static_cast<std::size_t>(i)], count / 2.0) << t;
        sum += count / 2.0;
    }
    EXPECT_DOUBLE_EQ(c.auc, sum / 51.0);
    EXPECT_EQ(c.rate_at_half, 0.5);
    EXPECT_THROW(success_curve(std::vector<double>{}), InvalidArgument);
}

TEST(Evaluate, SkipsAbsentFrames) {
    TrackResult r;
    r.boxes = {{0, 0, 10, 10}, {0, 0, 10, 10}, {0, 0, 10, 10}};
    const std::vector<std::optional<BoxRect>> truth{BoxRect{0, 0, 10, 10}, std::nullopt, BoxRect{30, 40, 10, 10}};
    const Metrics m = evaluate(r, truth);
    EXPECT_EQ(m.frames, 3u);
    EXPECT_EQ(m.evaluated_frames, 2u);
    EXPECT_EQ(m.mean_cle, 25.0);
    EXPECT_EQ(m.precision_at_20, 0.5);
    EXPECT_FALSE(m.iou[1]);
}

TEST(AnnotationLine, Formats) {
    EXPECT_EQ(*parse_annotation_line("10,20,30,40", 1), (BoxRect{10, 20, 30, 40}));
    EXPECT_EQ(*parse_annotation_line("10\t20\t30\t40", 1), (BoxRect{10, 20, 30, 40}));
    EXPECT_EQ(*parse_annotation_line(" 1.5, 2 ,3,4 \r", 1), (BoxRect{1.5, 2, 3, 4}));
    EXPECT_FALSE(parse_annotation_line("NaN,NaN,NaN,NaN", 1));
    EXPECT_FALSE(parse_annotation_line("nan,2,3,4", 1));
    EXPECT_FALSE(parse_annotation_line("1,2,0,4", 1));
    EXPECT_THROW(parse_annotation_line("1,2,3", 7), ParseError);
    EXPECT_THROW(parse_annotation_line("1,2,x,4", 7), ParseError);
    EXPECT_THROW(parse_annotation_line("1,2,-3,4", 7), ParseError);
    try {
        parse_annotation_line("1,2,3", 7);
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find('7'), std::string::npos);
    }
}

TEST(LoadSequence, ThreeFramesThreeLines) {
    const fs::path dir = ref::fresh_temp_dir("seq3");
    for (int i = 1; i <= 3; ++i) {
        write_image(dir / ("000" + std::to_string(i) + ".png"), Image(8, 6, 40.0 * i));
    }
    write_text(dir / "groundtruth_rect.txt", "1,2,3,4\nNaN,NaN,NaN,NaN\n5,6,7,8\n");
    const AnnotatedSequence s = load_sequence(dir);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.truth[0], (BoxRect{1, 2, 3, 4}));
    EXPECT_FALSE(s.truth[1]);
    EXPECT_EQ(s.frames[2].image_path.filename(), "0003.png");
    const Frame f = load_frame(s.frames[1], FeatureConfig{});
    EXPECT_EQ(f.image.width(), 8);
    EXPECT_EQ(f.image.pixels(0, 0), 80.0);
    fs::remove_all(dir);
}

TEST(LoadSequence, Errors) {
    const fs::path dir = ref::fresh_temp_dir("seqerr");
    EXPECT_THROW(load_sequence(dir / "missing"), DataError);
    write_image(dir / "0001.png", Image(4, 4, 0.0));
    EXPECT_THROW(load_sequence(dir), MissingAnnotation);
    write_text(dir / "groundtruth.txt", "1,1,2,2\n1,1,2,2\n");
    EXPECT_THROW(load_sequence(dir), DataError);
    fs::remove(dir / "0001.png");
    EXPECT_THROW(load_sequence(dir), EmptySequence);
    fs::remove_all(dir);
}

TEST(LoadFrame, ExternalBackendNeedsMatchingChannelFile) {
    const fs::path dir = ref::fresh_temp_dir("ext");
    write_image(dir / "0001.png", Image(16, 8, 0.0));
    write_text(dir / "groundtruth_rect.txt", "2,2,4,4\n");
    const fs::path feat = dir / "feat";
    fs::create_directories(feat);
    FeatureConfig config;
    config.backend = FeatureBackend::external;
    config.cell_size = 4;

    const AnnotatedSequence s = load_sequence(dir, feat);
    EXPECT_THROW(load_frame(s.frames[0], config), DataError);
    save_external_channels(feat / "0001.cfb", FeatureStack{{2, 3}, 1, {RealArray(Grid2{2, 3}, 1.0)}});
    EXPECT_THROW(load_frame(s.frames[0], config), GridMismatch);
    save_external_channels(feat / "0001.cfb", FeatureStack{{2, 4}, 1, {RealArray(Grid2{2, 4}, 1.0)}});
    const Frame f = load_frame(s.frames[0], config);
    ASSERT_TRUE(f.feature_map);
    EXPECT_EQ(f.feature_map->cell_size, 4);
    fs::remove_all(dir);
}

TEST(Writers, Formats) {
    const fs::path dir = ref::fresh_temp_dir("writers");
    const std::vector<BoxRect> boxes{{1, 2, 3, 4}, {0.5, 0.25, 10, 20}};
    write_boxes_csv(dir / "boxes.csv", boxes);
    EXPECT_EQ(slurp(dir / "boxes.csv"), "frame,x,y,w,h\n1,1,2,3,4\n2,0.5,0.25,10,20\n");

    const std::vector<DecisionRecord> d{{0, {5, 6}, 1.0, 1.0, 1.0, true}, {1, {7, 8}, 1.02, 0.5, 0.015, true},
                                        {2, {7, 8}, 1.0, 0.1, 0.0, false}};
    write_decisions_csv(dir / "decisions.csv", d);
    EXPECT_EQ(slurp(dir / "decisions.csv"),
              "frame,center_x,center_y,scale,consensus,eta_used,learned\n1,5,6,1,1,1,1\n2,7,8,1.02,0.5,0.015,1\n"
              "3,7,8,1,0.1,0,0\n");

    TrackResult r;
    r.boxes = boxes;
    const std::vector<std::optional<BoxRect>> truth{BoxRect{1, 2, 3, 4}, std::nullopt};
    const Metrics m = evaluate(r, truth);
    write_metrics_json(dir / "metrics.json", m);
    const nlohmann::json j = nlohmann::json::parse(slurp(dir / "metrics.json"));
    for (const char* key : {"precision_at_20", "auc", "success_rate_at_0_5", "mean_cle", "frames", "evaluated_frames"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["frames"], 2);
    EXPECT_TRUE(j["cle"][1].is_null());

    write_curves_csv(dir / "curves.csv", m);
    std::istringstream curves(slurp(dir / "curves.csv"));
    std::string line;
    std::getline(curves, line);
    EXPECT_EQ(line, "threshold,precision,success");
    int rows = 0;
    while (std::getline(curves, line)) ++rows;
    EXPECT_EQ(rows, 51);

    write_solver_trace_csv(dir / "trace.csv", std::vector<SolverTraceRow>{{1, 0.5, INFINITY, 1.0}, {2, 0.25, 0.125, 10}});
    EXPECT_EQ(slurp(dir / "trace.csv"), "iteration,objective,primal_residual,mu\n1,0.5,inf,1\n2,0.25,0.125,10\n");
    fs::remove_all(dir);
}

TEST(FormatNumber, RoundTrips) {
    ref::Rng rng(83);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 100; ++i) {
        const double v = u(rng);
        EXPECT_EQ(std::stod(format_number(v)), v);
    }
    EXPECT_EQ(format_number(2.0), "2");
}

TEST(Synthetic, TruthSequences) {
    SyntheticSpec still;
    still.velocity_x = 0;
    for (int t = 1; t < still.length; ++t) EXPECT_EQ(synthetic_truth(still, t), synthetic_truth(still, 0));

    const SyntheticSpec moving;
    for (int t = 1; t < moving.length; ++t) {
        EXPECT_DOUBLE_EQ(synthetic_truth(moving, t).x - synthetic_truth(moving, t - 1).x, 2.0);
    }

    SyntheticSpec ramp;
    ramp.scale_ramp = 1.02;
    ramp.length = 20;
    ramp.velocity_x = 0;
    ramp.start_x = 100;
    for (int t = 0; t < ramp.length; ++t) {
        const BoxRect b = synthetic_truth(ramp, t);
        EXPECT_NEAR(b.width, 24.0 * std::pow(1.02, t), 1e-9);
        EXPECT_NEAR(b.x + b.width / 2, 100.0, 1e-9);
    }
}

TEST(Synthetic, DeterministicAndValidated) {
    SyntheticSpec s;
    s.length = 5;
    s.noise_sigma = 3.0;
    const AnnotatedSequence a = generate_synthetic(s, 9);
    const AnnotatedSequence b = generate_synthetic(s, 9);
    const AnnotatedSequence c = generate_synthetic(s, 10);
    ASSERT_EQ(a.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(*a.frames[i].image, *b.frames[i].image);
    EXPECT_NE(*a.frames[0].image, *c.frames[0].image);

    SyntheticSpec huge;
    huge.object_width = 500;
    EXPECT_THROW(huge.validate(), InvalidArgument);
}

TEST(Synthetic, OccludedFrameHasNoBlobButKeepsTruth) {
    SyntheticSpec s;
    s.length = 3;
    s.occluded_frames = {1};
    s.velocity_x = 0;
    const AnnotatedSequence seq = generate_synthetic(s, 4);
    EXPECT_TRUE(seq.truth[1]);
    EXPECT_NE(*seq.frames[0].image, *seq.frames[1].image);
    EXPECT_EQ(*seq.frames[0].image, *seq.frames[2].image);
}

TEST(Synthetic, WrittenSequenceRoundTrips) {
    SyntheticSpec s;
    s.occluded_frames = {3};
    s.start_x = 48.3;
    const AnnotatedSequence seq = generate_synthetic(s, 5);
    const fs::path dir = ref::fresh_temp_dir("synth_rt");
    write_sequence(seq, dir);
    const AnnotatedSequence back = load_sequence(dir);
    ASSERT_EQ(back.size(), 50u);
    EXPECT_EQ(back.truth, seq.truth);
    std::ifstream gt(dir / "groundtruth_rect.txt");
    int lines = 0;
    for (std::string l; std::getline(gt, l);) ++lines;
    EXPECT_EQ(lines, 50);
    fs::remove_all(dir);
}

TEST(RunOpe, RequiresFirstFrameTruth) {
    SyntheticSpec s;
    s.length = 3;
    AnnotatedSequence seq = generate_synthetic(s, 1);
    seq.truth[0] = std::nullopt;
    EXPECT_THROW(run_ope(seq, TrackerConfig{}), DataError);
    seq.frames.clear();
    EXPECT_THROW(run_ope(seq, TrackerConfig{}), EmptySequence);
}

TEST(RunOpe, StaticSequenceScoresPerfectPrecision) {
    SyntheticSpec s;
    s.velocity_x = 0;
    const OpeResult r = run_ope(generate_synthetic(s, 6), TrackerConfig{});
    EXPECT_EQ(r.metrics.precision_at_20, 1.0);
    EXPECT_GT(r.metrics.auc, 0.9);
    for (const BoxRect& b : r.track.boxes) EXPECT_EQ(b, r.track.boxes.front());
}
