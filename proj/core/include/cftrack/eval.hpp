#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cftrack/geometry.hpp"
#include "cftrack/image.hpp"
#include "cftrack/tracker.hpp"

namespace cftrack {

class MissingAnnotation : public DataError {
public:
    using DataError::DataError;
};

class EmptySequence : public DataError {
public:
    using DataError::DataError;
};

/// One frame of a sequence: on disk, in memory, or both.
struct FrameRef {
    std::filesystem::path image_path;
    std::shared_ptr<const Image> image;
    std::filesystem::path feature_path;  // CFB1 channel map for the external backend
};

struct AnnotatedSequence {
    std::string name;
    std::vector<FrameRef> frames;
    std::vector<std::optional<BoxRect>> truth;  // nullopt marks an absent target

    std::size_t size() const noexcept { return frames.size(); }
};

/// Ground-truth file names probed, in order, inside a sequence directory.
inline constexpr const char* kAnnotationNames[] = {"groundtruth_rect.txt", "groundtruth.txt"};

/// Loads image files (sorted lexicographically) and the ground-truth file
/// of "x,y,w,h" lines. "NaN" in any field marks an absent target. When
/// `feature_dir` is given, frame `stem.ext` is paired with `stem.cfb` there.
AnnotatedSequence load_sequence(const std::filesystem::path& dir,
                                const std::filesystem::path& feature_dir = {});

/// Parses one annotation line; nullopt for NaN or zero-size (absent) targets.
std::optional<BoxRect> parse_annotation_line(const std::string& line, int line_number);

/// Materializes the image, plus the channel map when the backend needs it.
Frame load_frame(const FrameRef& ref, const FeatureConfig& features);

struct TrackResult {
    std::vector<BoxRect> boxes;
    std::vector<DecisionRecord> decisions;
};

struct CenterErrors {
    std::vector<std::optional<double>> per_frame;  // nullopt where truth is absent
    double mean = 0.0;
    std::size_t valid = 0;
};

CenterErrors center_error(std::span<const BoxRect> result, std::span<const std::optional<BoxRect>> truth);

double intersection_over_union(const BoxRect& a, const BoxRect& b);

std::vector<std::optional<double>> overlap(std::span<const BoxRect> result,
                                           std::span<const std::optional<BoxRect>> truth);

/// Fraction of frames with error <= t, t = 0..50 px.
struct PrecisionCurve {
    std::vector<double> thresholds;
    std::vector<double> values;
    double score_at_20 = 0.0;
};
PrecisionCurve precision_curve(std::span<const double> errors);

/// Fraction of frames with IoU > t, t = 0, 0.02, ..., 1; AUC is the mean.
struct SuccessCurve {
    std::vector<double> thresholds;
    std::vector<double> values;
    double auc = 0.0;
    double rate_at_half = 0.0;  // fraction with IoU > 0.5
};
SuccessCurve success_curve(std::span<const double> overlaps);

struct Metrics {
    double precision_at_20 = 0.0;
    double auc = 0.0;
    double success_rate_at_0_5 = 0.0;
    double mean_cle = 0.0;
    std::size_t frames = 0;
    std::size_t evaluated_frames = 0;
    std::vector<std::optional<double>> cle;
    std::vector<std::optional<double>> iou;
    PrecisionCurve precision;
    SuccessCurve success;
};

Metrics evaluate(const TrackResult& result, std::span<const std::optional<BoxRect>> truth);

struct OpeResult {
    TrackResult track;
    Metrics metrics;
};

/// One-pass evaluation: initialize on frame 1's truth, track every later
/// frame without re-initialization. A lost target keeps the last box.
OpeResult run_ope(const AnnotatedSequence& sequence, const TrackerConfig& config);

/// Shortest decimal form that round-trips to the same double.
std::string format_number(double v);

void write_boxes_csv(const std::filesystem::path& path, std::span<const BoxRect> boxes);
void write_decisions_csv(const std::filesystem::path& path, std::span<const DecisionRecord> decisions);
void write_metrics_json(const std::filesystem::path& path, const Metrics& metrics);
/// Row i: threshold index i, precision at i px, success at IoU i/50.
void write_curves_csv(const std::filesystem::path& path, const Metrics& metrics);
void write_solver_trace_csv(const std::filesystem::path& path, std::span<const SolverTraceRow> rows);

}  // namespace cftrack
