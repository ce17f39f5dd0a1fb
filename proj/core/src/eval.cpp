#include "cftrack/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cftrack {
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kImageExtensions{".jpg", ".jpeg", ".png", ".pgm", ".ppm", ".bmp", ".tif", ".tiff"};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::optional<BoxRect> parse_annotation_line(const std::string& line, int line_number) {
    std::string text = line;
    std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\t' || c == ';'; }, ' ');
    std::istringstream is(text);
    std::vector<std::string> fields;
    for (std::string tok; is >> tok;) fields.push_back(tok);
    if (fields.size() != 4) {
        throw ParseError("annotation line " + std::to_string(line_number) + ": expected 4 fields, found " +
                         std::to_string(fields.size()));
    }
    double v[4];
    bool absent = false;
    for (int i = 0; i < 4; ++i) {
        const std::string& f = fields[static_cast<std::size_t>(i)];
        if (lower(f) == "nan") {
            absent = true;
            continue;
        }
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[i]);
        if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v[i])) {
            throw ParseError("annotation line " + std::to_string(line_number) + ": cannot parse '" + f + "'");
        }
    }
    if (absent) return std::nullopt;
    if (v[2] < 0.0 || v[3] < 0.0) {
        throw ParseError("annotation line " + std::to_string(line_number) + ": negative box size");
    }
    if (v[2] == 0.0 || v[3] == 0.0) return std::nullopt;  // zero size marks full occlusion
    return BoxRect{v[0], v[1], v[2], v[3]};
}

AnnotatedSequence load_sequence(const fs::path& dir, const fs::path& feature_dir) {
    if (!fs::is_directory(dir)) throw DataError("sequence directory " + dir.string() + " does not exist");

    fs::path annotation;
    for (const char* name : kAnnotationNames) {
        if (fs::is_regular_file(dir / name)) {
            annotation = dir / name;
            break;
        }
    }
    if (annotation.empty()) {
        throw MissingAnnotation("no ground-truth file (groundtruth_rect.txt or groundtruth.txt) in " + dir.string());
    }

    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && kImageExtensions.count(lower(entry.path().extension().string()))) {
            images.push_back(entry.path());
        }
    }
    if (images.empty()) throw EmptySequence("no image frames in " + dir.string());
    std::sort(images.begin(), images.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

    AnnotatedSequence seq;
    seq.name = dir.filename().string();
    if (seq.name.empty()) seq.name = dir.parent_path().filename().string();

    std::ifstream is(annotation);
    std::string line;
    int line_number = 0;
    while (std::getline(is, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        seq.truth.push_back(parse_annotation_line(line, line_number));
    }
    if (seq.truth.size() > images.size()) {
        throw DataError(annotation.string() + " has " + std::to_string(seq.truth.size()) +
                        " boxes but only " + std::to_string(images.size()) + " frames exist");
    }
    seq.truth.resize(images.size());

    for (const auto& img : images) {
        FrameRef ref;
        ref.image_path = img;
        if (!feature_dir.empty()) ref.feature_path = feature_dir / (img.stem().string() + ".cfb");
        seq.frames.push_back(std::move(ref));
    }
    return seq;
}

Frame load_frame(const FrameRef& ref, const FeatureConfig& features) {
    Frame frame;
    if (ref.image) {
        frame.image = *ref.image;
    } else {
        frame.image = read_image(ref.image_path);
    }
    if (features.backend == FeatureBackend::external) {
        if (ref.feature_path.empty()) {
            throw DataError("external features requested but no feature file for " + ref.image_path.string());
        }
        const Grid2 expected{frame.image.height() / features.cell_size, frame.image.width() / features.cell_size};
        frame.feature_map = load_external_channels(ref.feature_path, expected, features.cell_size);
    }
    return frame;
}

namespace {

void require_lengths(std::size_t result, std::size_t truth) {
    if (result != truth) {
        throw InvalidArgument("result has " + std::to_string(result) + " boxes but truth has " +
                              std::to_string(truth));
    }
}

}  // namespace

CenterErrors center_error(std::span<const BoxRect> result, std::span<const std::optional<BoxRect>> truth) {
    require_lengths(result.size(), truth.size());
    CenterErrors out;
    out.per_frame.resize(result.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < result.size(); ++i) {
        if (!truth[i]) continue;
        const Point2 a = result[i].center();
        const Point2 b = truth[i]->center();
        const double e = std::hypot(a.x - b.x, a.y - b.y);
        out.per_frame[i] = e;
        sum += e;
        ++out.valid;
    }
    out.mean = out.valid ? sum / static_cast<double>(out.valid) : 0.0;
    return out;
}

double intersection_over_union(const BoxRect& a, const BoxRect& b) {
    const double ix = std::max(0.0, std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.width * a.height + b.width * b.height - inter;
    if (uni <= 0.0) return a == b ? 1.0 : 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<std::optional<double>> overlap(std::span<const BoxRect> result,
                                           std::span<const std::optional<BoxRect>> truth) {
    require_lengths(result.size(), truth.size());
    std::vector<std::optional<double>> out(result.size());
    for (std::size_t i = 0; i < result.size(); ++i) {
        if (truth[i]) out[i] = intersection_over_union(result[i], *truth[i]);
    }
    return out;
}

PrecisionCurve precision_curve(std::span<const double> errors) {
    if (errors.empty()) throw InvalidArgument("precision curve needs at least one frame");
    PrecisionCurve c;
    const double n = static_cast<double>(errors.size());
    for (int t = 0; t <= 50; ++t) {
        const auto hits = std::count_if(errors.begin(), errors.end(), [t](double e) { return e <= t; });
        c.thresholds.push_back(t);
        c.values.push_back(static_cast<double>(hits) / n);
    }
    c.score_at_20 = c.values[20];
    return c;
}

SuccessCurve success_curve(std::span<const double> overlaps) {
    if (overlaps.empty()) throw InvalidArgument("success curve needs at least one frame");
    SuccessCurve c;
    const double n = static_cast<double>(overlaps.size());
    double sum = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double t = i / 50.0;
        const auto hits = std::count_if(overlaps.begin(), overlaps.end(), [t](double o) { return o > t; });
        const double v = static_cast<double>(hits) / n;
        c.thresholds.push_back(t);
        c.values.push_back(v);
        sum += v;
    }
    c.auc = sum / static_cast<double>(c.values.size());
    c.rate_at_half = c.values[25];
    return c;
}

Metrics evaluate(const TrackResult& result, std::span<const std::optional<BoxRect>> truth) {
    Metrics m;
    const CenterErrors ce = center_error(result.boxes, truth);
    m.cle = ce.per_frame;
    m.iou = overlap(result.boxes, truth);
    m.frames = result.boxes.size();
    m.evaluated_frames = ce.valid;
    m.mean_cle = ce.mean;

    std::vector<double> errors, overlaps;
    for (std::size_t i = 0; i < m.cle.size(); ++i) {
        if (m.cle[i]) errors.push_back(*m.cle[i]);
        if (m.iou[i]) overlaps.push_back(*m.iou[i]);
    }
    m.precision = precision_curve(errors);
    m.success = success_curve(overlaps);
    m.precision_at_20 = m.precision.score_at_20;
    m.auc = m.success.auc;
    m.success_rate_at_0_5 = m.success.rate_at_half;
    return m;
}

OpeResult run_ope(const AnnotatedSequence& sequence, const TrackerConfig& config) {
    if (sequence.frames.empty()) throw EmptySequence("sequence " + sequence.name + " has no frames");
    if (sequence.truth.empty() || !sequence.truth.front()) {
        throw DataError("sequence " + sequence.name + " has no ground truth for its first frame");
    }

    OpeResult out;
    const BoxRect init = *sequence.truth.front();
    TrackerState state = initialize(load_frame(sequence.frames.front(), config.features), init, config);
    out.track.boxes.push_back(init);
    out.track.decisions.push_back({0, state.center, state.scale, 1.0, 1.0, true});

    for (std::size_t i = 1; i < sequence.frames.size(); ++i) {
        const Frame frame = load_frame(sequence.frames[i], config.features);
        try {
            StepOutcome s = step(std::move(state), frame, config);
            state = std::move(s.state);
            out.track.boxes.push_back(s.box);
            out.track.decisions.push_back(s.record);
        } catch (const LostTarget&) {
            ++state.frame_index;
            out.track.boxes.push_back(current_box(state));
            out.track.decisions.push_back({state.frame_index, state.center, state.scale, 0.0, 0.0, false});
        }
    }

    std::vector<std::optional<BoxRect>> truth = sequence.truth;
    truth.resize(sequence.frames.size());
    out.metrics = evaluate(out.track, truth);
    return out;
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    return os;
}

nlohmann::json optional_array(const std::vector<std::optional<double>>& values) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : values) arr.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    return arr;
}

}  // namespace

void write_boxes_csv(const fs::path& path, std::span<const BoxRect> boxes) {
    auto os = open_output(path);
    os << "frame,x,y,w,h\n";
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const BoxRect& b = boxes[i];
        os << i + 1 << ',' << format_number(b.x) << ',' << format_number(b.y) << ',' << format_number(b.width)
           << ',' << format_number(b.height) << '\n';
    }
}

void write_decisions_csv(const fs::path& path, std::span<const DecisionRecord> decisions) {
    auto os = open_output(path);
    os << "frame,center_x,center_y,scale,consensus,eta_used,learned\n";
    for (const auto& d : decisions) {
        os << d.frame + 1 << ',' << format_number(d.center.x) << ',' << format_number(d.center.y) << ','
           << format_number(d.scale) << ',' << format_number(d.consensus) << ',' << format_number(d.eta_used)
           << ',' << (d.learned ? 1 : 0) << '\n';
    }
}

void write_metrics_json(const fs::path& path, const Metrics& m) {
    nlohmann::json j;
    j["precision_at_20"] = m.precision_at_20;
    j["auc"] = m.auc;
    j["success_rate_at_0_5"] = m.success_rate_at_0_5;
    j["mean_cle"] = m.mean_cle;
    j["frames"] = m.frames;
    j["evaluated_frames"] = m.evaluated_frames;
    j["cle"] = optional_array(m.cle);
    j["iou"] = optional_array(m.iou);
    auto os = open_output(path);
    os << j.dump(2) << '\n';
}

void write_curves_csv(const fs::path& path, const Metrics& m) {
    auto os = open_output(path);
    os << "threshold,precision,success\n";
    const std::size_t rows = std::min(m.precision.values.size(), m.success.values.size());
    for (std::size_t i = 0; i < rows; ++i) {
        os << i << ',' << format_number(m.precision.values[i]) << ',' << format_number(m.success.values[i]) << '\n';
    }
}

void write_solver_trace_csv(const fs::path& path, std::span<const SolverTraceRow> rows) {
    auto os = open_output(path);
    os << "iteration,objective,primal_residual,mu\n";
    for (const auto& r : rows) {
        os << r.iteration << ',' << format_number(r.objective) << ',' << format_number(r.primal_residual) << ','
           << format_number(r.mu) << '\n';
    }
}

}  // namespace cftrack
