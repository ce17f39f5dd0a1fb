#pragma once

// Per-frame tracking loop: multi-scale detection, consensus check against a
// learned "ideal" response map, and gated model updates.
//
//   detect   -> position and scale from the best interpolated response
//   consensus C = exp(-||M_ideal - M_curr||^2)
//   C > threshold_high : learn with eta_high
//   C > threshold_low  : learn with eta_low
//   otherwise          : keep all models
//   learning: x_model = (1 - eta) x_model + eta x_curr
//             M_ideal = (1 - gamma) M_ideal + gamma M_curr
//             retrain the filter (warm-started) on x_model

#include <optional>

#include "cftrack/features.hpp"
#include "cftrack/geometry.hpp"
#include "cftrack/solver.hpp"

namespace cftrack {

/// Real response over the search-window grid. Zero displacement sits at
/// index (rows/2, cols/2).
struct ResponseMap {
    Grid2 grid;
    RealArray values;

    friend bool operator==(const ResponseMap&, const ResponseMap&) = default;
};

struct UpdateConfig {
    double threshold_high = 0.6;
    double threshold_low = 0.2;
    double eta_high = 0.045;
    double eta_low = 0.015;
    double gamma = 0.02;

    void validate() const;
};

struct ScaleConfig {
    int num_scales = 5;
    double scale_step = 1.02;
    double search_padding = 4.0;  // search-window area / target area

    void validate() const;
    /// scale_step^(i - (num_scales - 1) / 2)
    double factor(int index) const;
};

struct TrackerConfig {
    FeatureConfig features;
    SolverConfig solver;  // solver.admm_iterations is used at initialization
    UpdateConfig update;
    ScaleConfig scale;
    int update_iterations = 2;  // warm-started ADMM iterations per learning frame
    int max_cells = 64;         // cap on either side of the feature grid
    SolverTrace* trace = nullptr;

    void validate() const;
};

/// Sizes tying frame pixels, model pixels and feature cells together.
struct WindowGeometry {
    Size2 target;       // target size at scale 1, frame pixels
    Size2 window;       // search window at scale 1, frame pixels
    Grid2 patch;        // model resolution of the window, pixels
    Grid2 feature_grid; // outer grid (cells)
    Grid2 filter_grid;  // inner grid (cells)
    int cell_size = 1;

    friend bool operator==(const WindowGeometry&, const WindowGeometry&) = default;
};

WindowGeometry make_geometry(Size2 target, double search_padding, int cell_size, int max_cells);

/// A video frame plus, for the external backend, its frame-level channel map.
struct Frame {
    Image image;
    std::optional<FeatureStack> feature_map;
};

/// Windowed features of the search window centered at `center`.
FeatureStack window_features(const Frame& frame, Point2 center, double scale,
                             const WindowGeometry& geometry, const FeatureConfig& config);

struct TrackerState {
    Point2 center;
    Size2 target_size;
    double scale = 1.0;
    WindowGeometry geometry;
    PenalizationMask penalty;
    DesiredResponse desired;
    ComplexArray label_hat;
    SpectralStack appearance;
    ResponseMap ideal_response;
    FilterBank filter;
    int frame_index = 0;
};

struct DecisionRecord {
    int frame = 0;
    Point2 center;
    double scale = 1.0;
    double consensus = 0.0;
    double eta_used = 0.0;
    bool learned = false;
};

TrackerState initialize(const Frame& frame, const BoxRect& init_box, const TrackerConfig& config);

/// Centered response of the state's filter on a spectral feature window.
ResponseMap response_map(const FilterBank& filter, const SpectralStack& x_hat);

struct Detection {
    Point2 center;
    double scale = 1.0;
    int scale_index = 0;
    double peak = 0.0;
    ResponseMap response;  // winning scale, before interpolation
};

/// Throws LostTarget when the search window does not overlap the frame.
Detection detect(const TrackerState& state, const Frame& frame, const TrackerConfig& config);

double consensus(const ResponseMap& ideal, const ResponseMap& current);

struct UpdateOutcome {
    TrackerState state;
    DecisionRecord record;
};

/// Records the decision at state.center / state.scale and advances the frame
/// counter; models change only when the gate opens.
UpdateOutcome gated_update(TrackerState state, const SpectralStack& features_at_peak,
                           const ResponseMap& current, const TrackerConfig& config);

struct StepOutcome {
    TrackerState state;
    BoxRect box;
    DecisionRecord record;
};

/// Consumes `state` only after detection succeeds; on LostTarget it is intact.
StepOutcome step(TrackerState&& state, const Frame& frame, const TrackerConfig& config);

BoxRect current_box(const TrackerState& state);

}  // namespace cftrack
