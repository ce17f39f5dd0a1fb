#include "cftrack/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace cftrack {

void UpdateConfig::validate() const {
    auto unit_open = [](double v) { return v > 0.0 && v < 1.0; };
    auto unit_half = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!unit_open(threshold_high) || !unit_open(threshold_low)) {
        throw InvalidArgument("consensus thresholds must lie in (0, 1)");
    }
    if (!(threshold_low < threshold_high)) throw InvalidArgument("threshold_low must be below threshold_high");
    if (!unit_half(eta_high) || !unit_half(eta_low) || !unit_half(gamma)) {
        throw InvalidArgument("learning rates must lie in (0, 1]");
    }
    if (!(eta_low <= eta_high)) throw InvalidArgument("eta_low must not exceed eta_high");
}

void ScaleConfig::validate() const {
    if (num_scales < 1 || num_scales % 2 == 0) throw InvalidArgument("num_scales must be odd and >= 1");
    if (!(scale_step > 1.0)) throw InvalidArgument("scale_step must be > 1");
    if (!(search_padding > 1.0)) throw InvalidArgument("search_padding must be > 1");
}

double ScaleConfig::factor(int index) const {
    return std::pow(scale_step, index - (num_scales - 1) / 2);
}

void TrackerConfig::validate() const {
    solver.validate();
    update.validate();
    scale.validate();
    if (features.cell_size < 1) throw InvalidArgument("cell_size must be >= 1");
    if (update_iterations < 1) throw InvalidArgument("update_iterations must be >= 1");
    if (max_cells < 2) throw InvalidArgument("max_cells must be >= 2");
}

WindowGeometry make_geometry(Size2 target, double search_padding, int cell_size, int max_cells) {
    if (!(target.width > 0.0) || !(target.height > 0.0)) throw InvalidArgument("target size must be positive");
    const double side = std::sqrt(search_padding);
    const double want_w = target.width * side;
    const double want_h = target.height * side;
    // Frame pixels per model pixel; > 1 only when the window exceeds max_cells.
    const double resample = std::max(1.0, std::max(want_w, want_h) / (cell_size * max_cells));
    const double cell_px = cell_size * resample;

    const Grid2 outer{std::clamp(static_cast<int>(std::lround(want_h / cell_px)), 1, max_cells),
                      std::clamp(static_cast<int>(std::lround(want_w / cell_px)), 1, max_cells)};
    const Grid2 inner{std::clamp(static_cast<int>(std::lround(target.height / cell_px)), 1, outer.rows),
                      std::clamp(static_cast<int>(std::lround(target.width / cell_px)), 1, outer.cols)};

    WindowGeometry g;
    g.target = target;
    g.window = {outer.cols * cell_px, outer.rows * cell_px};
    g.patch = {outer.rows * cell_size, outer.cols * cell_size};
    g.feature_grid = outer;
    g.filter_grid = inner;
    g.cell_size = cell_size;
    return g;
}

FeatureStack window_features(const Frame& frame, Point2 center, double scale,
                             const WindowGeometry& geometry, const FeatureConfig& config) {
    FeatureStack stack;
    if (config.backend == FeatureBackend::external) {
        if (!frame.feature_map) throw DataError("external feature backend requires a channel map for every frame");
        stack = extract_feature_window(*frame.feature_map, center, geometry.window, scale, geometry.feature_grid);
    } else {
        const Image patch = extract_patch(frame.image, center, geometry.window, scale, geometry.patch);
        stack = compute_features(patch, config);
    }
    return apply_window(std::move(stack), config.window);
}

ResponseMap response_map(const FilterBank& filter, const SpectralStack& x_hat) {
    RealArray centered = fftshift(correlation_response(filter, x_hat));
    return {centered.grid(), std::move(centered)};
}

BoxRect current_box(const TrackerState& state) {
    return BoxRect::from_center(state.center,
                                {state.target_size.width * state.scale, state.target_size.height * state.scale});
}

TrackerState initialize(const Frame& frame, const BoxRect& init_box, const TrackerConfig& config) {
    config.validate();
    if (!(init_box.width > 0.0) || !(init_box.height > 0.0)) {
        throw InvalidArgument("initial box must have positive area");
    }
    const Point2 c = init_box.center();
    if (config.features.backend != FeatureBackend::external) {
        if (c.x < 0.0 || c.y < 0.0 || c.x > frame.image.width() || c.y > frame.image.height()) {
            throw InvalidArgument("initial box center lies outside the frame");
        }
    }

    TrackerState s;
    s.center = c;
    s.target_size = init_box.size();
    s.scale = 1.0;
    s.geometry = make_geometry(s.target_size, config.scale.search_padding, config.features.cell_size,
                               config.max_cells);
    s.penalty = make_penalization(s.geometry.filter_grid, config.solver.penalty_floor, config.solver.penalty_slope);
    const double sigma = config.solver.sigma_factor *
                         std::sqrt(static_cast<double>(s.geometry.filter_grid.rows) * s.geometry.filter_grid.cols);
    s.desired = make_desired_response(s.geometry.feature_grid, sigma);
    s.label_hat = dft2(training_target(s.desired));

    s.appearance = to_spectral(window_features(frame, s.center, 1.0, s.geometry, config.features));
    s.filter = train_filter(s.appearance, s.label_hat, s.penalty, config.solver, std::nullopt, config.trace);
    s.ideal_response = response_map(s.filter, s.appearance);
    s.frame_index = 0;
    return s;
}

namespace {

struct Peak {
    double value;
    int row;
    int col;
};

Peak find_peak(const RealArray& a) {
    Peak best{a[0], 0, 0};
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) {
            if (a(r, c) > best.value) best = {a(r, c), r, c};
        }
    }
    return best;
}

void require_window_overlap(const TrackerState& state, const Frame& frame) {
    const double half_w = state.geometry.window.width * state.scale / 2.0;
    const double half_h = state.geometry.window.height * state.scale / 2.0;
    double width = frame.image.width();
    double height = frame.image.height();
    if (frame.image.empty() && frame.feature_map) {
        width = frame.feature_map->grid.cols * frame.feature_map->cell_size;
        height = frame.feature_map->grid.rows * frame.feature_map->cell_size;
    }
    const bool outside = state.center.x + half_w <= 0.0 || state.center.x - half_w >= width ||
                         state.center.y + half_h <= 0.0 || state.center.y - half_h >= height;
    if (outside || !std::isfinite(state.center.x) || !std::isfinite(state.center.y)) {
        throw LostTarget("search window at (" + std::to_string(state.center.x) + ", " +
                         std::to_string(state.center.y) + ") lies outside the frame");
    }
}

}  // namespace

Detection detect(const TrackerState& state, const Frame& frame, const TrackerConfig& config) {
    require_window_overlap(state, frame);
    const ScaleConfig& sc = config.scale;
    const WindowGeometry& geo = state.geometry;
    const int mid = (sc.num_scales - 1) / 2;

    // Visit scales nearest-first so ties resolve toward no scale change.
    std::vector<int> order(static_cast<std::size_t>(sc.num_scales));
    for (int i = 0; i < sc.num_scales; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [mid](int a, int b) { return std::abs(a - mid) < std::abs(b - mid); });

    std::optional<Detection> best;
    for (int i : order) {
        const double factor = sc.factor(i);
        const double window_scale = state.scale * factor;
        const SpectralStack x_hat =
            to_spectral(window_features(frame, state.center, window_scale, geo, config.features));
        const RealArray raw = correlation_response(state.filter, x_hat);
        const RealArray fine = interpolate_spectral(raw, geo.patch);
        const Peak peak = find_peak(fine);
        if (best && !(peak.value > best->peak)) continue;

        const double px_x = geo.window.width * window_scale / geo.patch.cols;
        const double px_y = geo.window.height * window_scale / geo.patch.rows;
        Detection d;
        d.center = {state.center.x + wrap_displacement(peak.col, geo.patch.cols) * px_x,
                    state.center.y + wrap_displacement(peak.row, geo.patch.rows) * px_y};
        d.scale = window_scale;
        d.scale_index = i;
        d.peak = peak.value;
        RealArray centered = fftshift(raw);
        d.response = {centered.grid(), std::move(centered)};
        best = std::move(d);
    }
    return std::move(*best);
}

double consensus(const ResponseMap& ideal, const ResponseMap& current) {
    require_same_grid(ideal.values.grid(), current.values.grid(), "consensus");
    double dist = 0.0;
    for (std::size_t k = 0; k < ideal.values.size(); ++k) {
        const double d = ideal.values[k] - current.values[k];
        dist += d * d;
    }
    return std::exp(-dist);
}

namespace {

template <typename T>
void blend(Array2<T>& model, const Array2<T>& current, double rate) {
    require_same_grid(model.grid(), current.grid(), "model update");
    if (rate == 1.0) {
        model = current;
        return;
    }
    for (std::size_t k = 0; k < model.size(); ++k) model[k] = (1.0 - rate) * model[k] + rate * current[k];
}

}  // namespace

UpdateOutcome gated_update(TrackerState state, const SpectralStack& features_at_peak,
                           const ResponseMap& current, const TrackerConfig& config) {
    const UpdateConfig& uc = config.update;
    const double c = consensus(state.ideal_response, current);

    DecisionRecord record;
    record.center = state.center;
    record.scale = state.scale;
    record.consensus = c;

    double eta = 0.0;
    if (c > uc.threshold_high) {
        eta = uc.eta_high;
    } else if (c > uc.threshold_low) {
        eta = uc.eta_low;
    } else {
        record.frame = ++state.frame_index;
        return {std::move(state), record};
    }

    if (features_at_peak.depth() != state.appearance.depth()) {
        throw GridMismatch("gated_update: feature depth differs from the appearance model");
    }
    for (int d = 0; d < state.appearance.depth(); ++d) {
        blend(state.appearance.channels[static_cast<std::size_t>(d)],
              features_at_peak.channels[static_cast<std::size_t>(d)], eta);
    }
    blend(state.ideal_response.values, current.values, uc.gamma);

    SolverConfig solver = config.solver;
    solver.admm_iterations = config.update_iterations;
    state.filter = train_filter(state.appearance, state.label_hat, state.penalty, solver, state.filter, config.trace);

    record.eta_used = eta;
    record.learned = true;
    record.frame = ++state.frame_index;
    return {std::move(state), record};
}

StepOutcome step(TrackerState&& state, const Frame& frame, const TrackerConfig& config) {
    Detection det = detect(state, frame, config);
    const SpectralStack at_peak =
        to_spectral(window_features(frame, det.center, det.scale, state.geometry, config.features));

    TrackerState next = std::move(state);
    next.center = det.center;
    next.scale = det.scale;
    UpdateOutcome up = gated_update(std::move(next), at_peak, det.response, config);
    const BoxRect box = current_box(up.state);
    return {std::move(up.state), box, up.record};
}

}  // namespace cftrack
