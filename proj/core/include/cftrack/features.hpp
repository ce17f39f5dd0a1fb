#pragma once

#include <filesystem>
#include <vector>

#include "cftrack/array.hpp"
#include "cftrack/geometry.hpp"
#include "cftrack/image.hpp"

namespace cftrack {

/// D-channel feature map over the search window. All channels share `grid`.
struct FeatureStack {
    Grid2 grid;
    int cell_size = 1;
    std::vector<RealArray> channels;

    int depth() const noexcept { return static_cast<int>(channels.size()); }

    /// Throws GridMismatch / NonFiniteValue / InvalidArgument on a broken stack.
    void validate() const;

    friend bool operator==(const FeatureStack&, const FeatureStack&) = default;
};

/// Per-channel unitary spectra of a FeatureStack.
struct SpectralStack {
    Grid2 grid;
    std::vector<ComplexArray> channels;

    int depth() const noexcept { return static_cast<int>(channels.size()); }
    friend bool operator==(const SpectralStack&, const SpectralStack&) = default;
};

SpectralStack to_spectral(const FeatureStack& stack);

enum class FeatureBackend { grayscale, gradient_cells, external };
enum class WindowKind { none, cosine };

struct FeatureConfig {
    FeatureBackend backend = FeatureBackend::gradient_cells;
    int cell_size = 4;
    WindowKind window = WindowKind::cosine;
    /// grayscale: scale to unit variance. gradient_cells: L2-normalize each cell.
    bool normalize = false;
};

/// Orientation bins of the gradient_cells backend (unsigned, over [0, pi)).
inline constexpr int kGradientBins = 9;

/// Samples a `size * scale` window centered at `center`, resampled to
/// `model` (rows x cols pixels) by bilinear interpolation with edge
/// replication outside the frame.
Image extract_patch(const Image& frame, Point2 center, Size2 size, double scale, Grid2 model);

/// Same window geometry as extract_patch, sampled from a frame-level feature
/// map whose cells are `map.cell_size` frame pixels wide. Output grid is
/// `model` cells.
FeatureStack extract_feature_window(const FeatureStack& map, Point2 center, Size2 size,
                                    double scale, Grid2 model);

/// Patch dimensions must be multiples of config.cell_size.
FeatureStack compute_features(const Image& patch, const FeatureConfig& config);

/// Separable raised-cosine taper, zero at the grid edges.
RealArray cosine_window(Grid2 grid);

FeatureStack apply_window(FeatureStack stack, WindowKind window);

/// Binary channel file: "CFB1", u32 D, u32 height, u32 width, then D*H*W
/// little-endian float32 values, channel-major then row-major. Values are
/// narrowed to float32 on save.
void save_external_channels(const std::filesystem::path& path, const FeatureStack& stack);

/// Throws DataError (unreadable), ParseError (malformed), GridMismatch (grid
/// differs from `expected_grid`) or NonFiniteValue.
FeatureStack load_external_channels(const std::filesystem::path& path, Grid2 expected_grid,
                                    int cell_size = 1);

}  // namespace cftrack
