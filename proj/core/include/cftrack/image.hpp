#pragma once

#include <filesystem>

#include "cftrack/array.hpp"
#include "cftrack/geometry.hpp"

namespace cftrack {

/// Upper end of the intensity range. Pixels use 8-bit units so that feature
/// energies sit on the scale the default ADMM penalty schedule assumes.
inline constexpr double kIntensityMax = 255.0;

/// Single-channel intensity image, values nominally in [0, kIntensityMax].
struct Image {
    RealArray pixels;

    Image() = default;
    explicit Image(RealArray p) : pixels(std::move(p)) {}
    Image(int width, int height, double fill = 0.0) : pixels(Grid2{height, width}, fill) {}

    int width() const noexcept { return pixels.cols(); }
    int height() const noexcept { return pixels.rows(); }
    bool empty() const noexcept { return pixels.empty(); }

    double& at(int x, int y) noexcept { return pixels(y, x); }
    double at(int x, int y) const noexcept { return pixels(y, x); }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Bilinear sample at a continuous pixel-index position (pixel (r, c) sits
/// at index coordinates (r, c)). Positions outside the image take the value
/// of the nearest edge pixel.
double sample_bilinear(const RealArray& img, double row, double col) noexcept;

/// Loads any format OpenCV can decode, converted to grayscale in
/// [0, kIntensityMax]; 16-bit inputs are rescaled.
Image read_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale image; values are rounded and clamped to
/// [0, kIntensityMax].
void write_image(const std::filesystem::path& path, const Image& image);

}  // namespace cftrack
