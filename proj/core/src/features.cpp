#include "cftrack/features.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "cftrack/spectral.hpp"

namespace cftrack {

void FeatureStack::validate() const {
    if (channels.empty()) throw InvalidArgument("feature stack has no channels");
    if (cell_size < 1) throw InvalidArgument("feature stack cell size must be >= 1");
    for (const auto& ch : channels) {
        require_same_grid(ch.grid(), grid, "feature stack channel");
        if (!all_finite(ch)) throw NonFiniteValue("feature stack contains non-finite values");
    }
}

SpectralStack to_spectral(const FeatureStack& stack) {
    SpectralStack out{stack.grid, {}};
    out.channels.reserve(stack.channels.size());
    for (const auto& ch : stack.channels) out.channels.push_back(dft2(ch));
    return out;
}

namespace {

void check_window_args(Point2 center, Size2 size, double scale, Grid2 model) {
    if (!std::isfinite(center.x) || !std::isfinite(center.y)) {
        throw InvalidArgument("patch center must be finite");
    }
    if (!std::isfinite(scale) || scale <= 0.0) throw InvalidArgument("patch scale must be finite and positive");
    if (!(size.width > 0.0) || !(size.height > 0.0) || !std::isfinite(size.width) ||
        !std::isfinite(size.height)) {
        throw InvalidArgument("patch size must be positive");
    }
    if (!model.valid()) throw InvalidArgument("model resolution must be at least 1x1");
}

// Continuous frame coordinate of output sample i on an axis of n samples.
inline double sample_coordinate(double center, double extent, int n, int i) {
    return center + (i + 0.5 - n / 2.0) * (extent / n);
}

}  // namespace

Image extract_patch(const Image& frame, Point2 center, Size2 size, double scale, Grid2 model) {
    if (frame.empty()) throw InvalidArgument("cannot extract a patch from an empty frame");
    check_window_args(center, size, scale, model);

    Image patch(model.cols, model.rows);
    const double extent_x = size.width * scale;
    const double extent_y = size.height * scale;
    for (int r = 0; r < model.rows; ++r) {
        const double row = sample_coordinate(center.y, extent_y, model.rows, r) - 0.5;
        for (int c = 0; c < model.cols; ++c) {
            const double col = sample_coordinate(center.x, extent_x, model.cols, c) - 0.5;
            patch.pixels(r, c) = sample_bilinear(frame.pixels, row, col);
        }
    }
    return patch;
}

FeatureStack extract_feature_window(const FeatureStack& map, Point2 center, Size2 size,
                                    double scale, Grid2 model) {
    map.validate();
    check_window_args(center, size, scale, model);

    const double cell = map.cell_size;
    FeatureStack out{model, map.cell_size, {}};
    out.channels.reserve(map.channels.size());
    for (const auto& ch : map.channels) {
        RealArray sampled(model);
        for (int r = 0; r < model.rows; ++r) {
            const double row = sample_coordinate(center.y, size.height * scale, model.rows, r) / cell - 0.5;
            for (int c = 0; c < model.cols; ++c) {
                const double col = sample_coordinate(center.x, size.width * scale, model.cols, c) / cell - 0.5;
                sampled(r, c) = sample_bilinear(ch, row, col);
            }
        }
        out.channels.push_back(std::move(sampled));
    }
    return out;
}

namespace {

FeatureStack grayscale_features(const Image& patch, const FeatureConfig& config) {
    const int cs = config.cell_size;
    const Grid2 grid{patch.height() / cs, patch.width() / cs};
    RealArray cells(grid, 0.0);
    for (int r = 0; r < patch.height(); ++r) {
        for (int c = 0; c < patch.width(); ++c) cells(r / cs, c / cs) += patch.pixels(r, c);
    }
    const double area = static_cast<double>(cs) * cs;
    double mean = 0.0;
    for (auto& v : cells) {
        v /= area;
        mean += v;
    }
    mean /= static_cast<double>(cells.size());
    for (auto& v : cells) v -= mean;

    if (config.normalize) {
        const double var = squared_norm(cells) / static_cast<double>(cells.size());
        if (var > 0.0) {
            const double inv = 1.0 / std::sqrt(var);
            for (auto& v : cells) v *= inv;
        }
    }
    return FeatureStack{grid, cs, {std::move(cells)}};
}

FeatureStack gradient_features(const Image& patch, const FeatureConfig& config) {
    const int cs = config.cell_size;
    const int h = patch.height();
    const int w = patch.width();
    const Grid2 grid{h / cs, w / cs};
    FeatureStack out{grid, cs, std::vector<RealArray>(kGradientBins, RealArray(grid, 0.0))};

    const double bin_width = std::numbers::pi / kGradientBins;
    const auto& px = patch.pixels;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double gx = px(r, std::min(c + 1, w - 1)) - px(r, std::max(c - 1, 0));
            const double gy = px(std::min(r + 1, h - 1), c) - px(std::max(r - 1, 0), c);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double theta = std::atan2(gy, gx);
            if (theta < 0.0) theta += std::numbers::pi;
            if (theta >= std::numbers::pi) theta -= std::numbers::pi;
            const int bin = std::min(static_cast<int>(theta / bin_width), kGradientBins - 1);
            out.channels[bin](r / cs, c / cs) += mag;
        }
    }

    if (config.normalize) {
        constexpr double eps = 1e-12;
        for (int r = 0; r < grid.rows; ++r) {
            for (int c = 0; c < grid.cols; ++c) {
                double energy = 0.0;
                for (const auto& ch : out.channels) energy += ch(r, c) * ch(r, c);
                const double inv = 1.0 / std::sqrt(energy + eps);
                for (auto& ch : out.channels) ch(r, c) *= inv;
            }
        }
    }
    return out;
}

}  // namespace

FeatureStack compute_features(const Image& patch, const FeatureConfig& config) {
    if (config.cell_size < 1) throw InvalidArgument("cell_size must be >= 1");
    if (patch.empty() || patch.width() % config.cell_size != 0 ||
        patch.height() % config.cell_size != 0) {
        throw GridMismatch("patch " + std::to_string(patch.width()) + "x" +
                           std::to_string(patch.height()) + " is not divisible by cell size " +
                           std::to_string(config.cell_size));
    }
    switch (config.backend) {
        case FeatureBackend::grayscale:
            return grayscale_features(patch, config);
        case FeatureBackend::gradient_cells:
            return gradient_features(patch, config);
        case FeatureBackend::external:
            throw InvalidArgument("external features are read from channel files, not computed from pixels");
    }
    throw InvalidArgument("unknown feature backend");
}

RealArray cosine_window(Grid2 grid) {
    auto taper = [](int n) {
        std::vector<double> t(static_cast<std::size_t>(n), 1.0);
        if (n == 1) return t;
        for (int i = 0; i < n; ++i) {
            t[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
        }
        return t;
    };
    const auto tr = taper(grid.rows);
    const auto tc = taper(grid.cols);
    RealArray out(grid);
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) out(r, c) = tr[static_cast<std::size_t>(r)] * tc[static_cast<std::size_t>(c)];
    }
    return out;
}

FeatureStack apply_window(FeatureStack stack, WindowKind window) {
    if (window == WindowKind::none) return stack;
    const RealArray taper = cosine_window(stack.grid);
    for (auto& ch : stack.channels) {
        require_same_grid(ch.grid(), stack.grid, "apply_window");
        for (std::size_t i = 0; i < ch.size(); ++i) ch[i] *= taper[i];
    }
    return stack;
}

namespace {

constexpr std::array<char, 4> kMagic{'C', 'F', 'B', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void save_external_channels(const std::filesystem::path& path, const FeatureStack& stack) {
    stack.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    os.write(kMagic.data(), kMagic.size());
    put_u32(os, static_cast<std::uint32_t>(stack.depth()));
    put_u32(os, static_cast<std::uint32_t>(stack.grid.rows));
    put_u32(os, static_cast<std::uint32_t>(stack.grid.cols));
    for (const auto& ch : stack.channels) {
        for (double v : ch) put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    if (!os) throw DataError("failed writing " + path.string());
}

FeatureStack load_external_channels(const std::filesystem::path& path, Grid2 expected_grid,
                                    int cell_size) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open feature file " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    const std::string where = "feature file " + path.string();
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
        throw ParseError(where + ": missing CFB1 header");
    }
    const std::uint32_t depth = get_u32(&bytes[4]);
    const std::uint32_t rows = get_u32(&bytes[8]);
    const std::uint32_t cols = get_u32(&bytes[12]);
    if (depth == 0 || rows == 0 || cols == 0) throw ParseError(where + ": zero-sized dimension in header");
    const std::uint64_t count = std::uint64_t{depth} * rows * cols;
    if (bytes.size() != 16 + count * 4) {
        throw ParseError(where + ": expected " + std::to_string(16 + count * 4) + " bytes, found " +
                         std::to_string(bytes.size()));
    }
    const Grid2 grid{static_cast<int>(rows), static_cast<int>(cols)};
    if (grid != expected_grid) {
        throw GridMismatch(where + ": grid " + to_string(grid) + " differs from expected " +
                           to_string(expected_grid));
    }

    FeatureStack out{grid, cell_size, {}};
    out.channels.reserve(depth);
    const unsigned char* p = bytes.data() + 16;
    for (std::uint32_t d = 0; d < depth; ++d) {
        RealArray ch(grid);
        for (auto& v : ch) {
            v = static_cast<double>(std::bit_cast<float>(get_u32(p)));
            p += 4;
            if (!std::isfinite(v)) throw NonFiniteValue(where + ": non-finite value in channel " + std::to_string(d));
        }
        out.channels.push_back(std::move(ch));
    }
    return out;
}

}  // namespace cftrack
