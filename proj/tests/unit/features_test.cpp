#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <unistd.h>

#include "cftrack/features.hpp"
#include "reference.hpp"

using namespace cftrack;
namespace fs = std::filesystem;

namespace {

Image ramp_image(int width, int height) {
    Image img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) img.at(x, y) = 3.0 * x + 7.0 * y + 0.01 * x * y;
    }
    return img;
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("cftrack_features_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(ExtractPatch, InsideFrameAtUnitScaleIsSubimage) {
    const Image frame = ramp_image(40, 30);
    // 8x6 window centered on a pixel boundary maps model pixels onto frame pixels.
    const Image patch = extract_patch(frame, {20.0, 15.0}, {8.0, 6.0}, 1.0, {6, 8});
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 8; ++c) EXPECT_NEAR(patch.pixels(r, c), frame.at(16 + c, 12 + r), 1e-12);
    }
}

TEST(ExtractPatch, CornerUsesEdgeReplication) {
    Image frame(10, 10, 0.0);
    for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) frame.at(x, y) = x + 10.0 * y;
    }
    const Image patch = extract_patch(frame, {0.0, 0.0}, {4.0, 4.0}, 1.0, {4, 4});
    EXPECT_EQ(patch.pixels(0, 0), frame.at(0, 0));
    EXPECT_EQ(patch.pixels(1, 1), frame.at(0, 0));
    EXPECT_EQ(patch.pixels(0, 3), frame.at(1, 0));
    EXPECT_EQ(patch.pixels(3, 3), frame.at(1, 1));
}

TEST(ExtractPatch, ScaledMatchesBilinearOracle) {
    const Image frame = ramp_image(64, 48);
    const Point2 center{30.3, 21.7};
    const Size2 size{12.0, 10.0};
    const double scale = 2.0;
    const Grid2 model{10, 12};
    const Image patch = extract_patch(frame, center, size, scale, model);
    for (int r = 0; r < model.rows; ++r) {
        for (int c = 0; c < model.cols; ++c) {
            // Sample centers: evenly spaced over the scaled window, pixel centers at +0.5.
            const double x = center.x - size.width * scale / 2 + (c + 0.5) * size.width * scale / model.cols;
            const double y = center.y - size.height * scale / 2 + (r + 0.5) * size.height * scale / model.rows;
            EXPECT_NEAR(patch.pixels(r, c), ref::bilinear(frame.pixels, y - 0.5, x - 0.5), 1e-6);
        }
    }
}

TEST(ExtractPatch, RejectsNonFiniteArguments) {
    const Image frame = ramp_image(8, 8);
    EXPECT_THROW(extract_patch(frame, {NAN, 2.0}, {2.0, 2.0}, 1.0, {2, 2}), InvalidArgument);
    EXPECT_THROW(extract_patch(frame, {2.0, 2.0}, {2.0, 2.0}, INFINITY, {2, 2}), InvalidArgument);
    EXPECT_THROW(extract_patch(frame, {2.0, 2.0}, {2.0, 2.0}, 0.0, {2, 2}), InvalidArgument);
    EXPECT_THROW(extract_patch(Image{}, {2.0, 2.0}, {2.0, 2.0}, 1.0, {2, 2}), InvalidArgument);
}

TEST(ComputeFeatures, ConstantPatchGivesZeros) {
    const Image patch(16, 12, 100.0);
    for (FeatureBackend backend : {FeatureBackend::grayscale, FeatureBackend::gradient_cells}) {
        FeatureConfig config;
        config.backend = backend;
        config.cell_size = 4;
        const FeatureStack s = compute_features(patch, config);
        EXPECT_EQ(s.grid, (Grid2{3, 4}));
        EXPECT_EQ(s.depth(), backend == FeatureBackend::grayscale ? 1 : kGradientBins);
        for (const RealArray& ch : s.channels) {
            for (double v : ch) EXPECT_EQ(v, 0.0);
        }
    }
}

TEST(ComputeFeatures, GrayscaleIsMeanSubtractedCellAverage) {
    const Image patch = ramp_image(8, 4);
    FeatureConfig config;
    config.backend = FeatureBackend::grayscale;
    config.cell_size = 2;
    const FeatureStack s = compute_features(patch, config);
    ASSERT_EQ(s.grid, (Grid2{2, 4}));
    double mean = 0.0;
    RealArray cells(s.grid);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 4; ++c) {
            double sum = 0.0;
            for (int dr = 0; dr < 2; ++dr) {
                for (int dc = 0; dc < 2; ++dc) sum += patch.at(2 * c + dc, 2 * r + dr);
            }
            cells(r, c) = sum / 4.0;
            mean += cells(r, c) / 8.0;
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) EXPECT_NEAR(s.channels[0][i], cells[i] - mean, 1e-12);
}

TEST(ComputeFeatures, VerticalEdgeMatchesFiniteDifferenceHistogram) {
    Image patch(12, 8, 10.0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 6; x < 12; ++x) patch.at(x, y) = 200.0;
    }
    FeatureConfig config;
    config.backend = FeatureBackend::gradient_cells;
    config.cell_size = 4;
    const FeatureStack s = compute_features(patch, config);

    // Oracle: central differences with clamped borders, unsigned angle,
    // hard assignment to 9 bins of width pi/9, magnitude votes per cell.
    std::vector<RealArray> expected(kGradientBins, RealArray(s.grid, 0.0));
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 12; ++x) {
            const double gx = patch.at(std::min(x + 1, 11), y) - patch.at(std::max(x - 1, 0), y);
            const double gy = patch.at(x, std::min(y + 1, 7)) - patch.at(x, std::max(y - 1, 0));
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx);
            if (angle < 0) angle += std::numbers::pi;
            const int bin = std::min(static_cast<int>(angle / (std::numbers::pi / 9)), 8);
            expected[static_cast<std::size_t>(bin)](y / 4, x / 4) += mag;
        }
    }
    double total = 0.0;
    for (int b = 0; b < kGradientBins; ++b) {
        for (std::size_t i = 0; i < expected[0].size(); ++i) {
            EXPECT_NEAR(s.channels[static_cast<std::size_t>(b)][i], expected[static_cast<std::size_t>(b)][i], 1e-12);
            total += s.channels[static_cast<std::size_t>(b)][i];
        }
    }
    // A vertical edge has a purely horizontal gradient: all energy in bin 0.
    double bin0 = 0.0;
    for (double v : s.channels[0]) bin0 += v;
    EXPECT_GT(total, 0.0);
    EXPECT_EQ(bin0, total);
}

TEST(ComputeFeatures, NormalizedCellsHaveUnitEnergy) {
    const Image patch = ramp_image(8, 8);
    FeatureConfig config;
    config.backend = FeatureBackend::gradient_cells;
    config.cell_size = 4;
    config.normalize = true;
    const FeatureStack s = compute_features(patch, config);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            double e = 0.0;
            for (const auto& ch : s.channels) e += ch(r, c) * ch(r, c);
            EXPECT_NEAR(e, 1.0, 1e-9);
        }
    }
}

TEST(ComputeFeatures, Deterministic) {
    const Image patch = ramp_image(16, 16);
    FeatureConfig config;
    EXPECT_EQ(compute_features(patch, config), compute_features(patch, config));
}

TEST(ComputeFeatures, RejectsIndivisiblePatchAndExternalBackend) {
    FeatureConfig config;
    config.cell_size = 4;
    EXPECT_THROW(compute_features(Image(10, 8), config), GridMismatch);
    config.backend = FeatureBackend::external;
    EXPECT_THROW(compute_features(Image(8, 8), config), InvalidArgument);
}

TEST(ApplyWindow, NoneIsIdentity) {
    ref::Rng rng(31);
    const FeatureStack s = ref::random_stack({5, 6}, 3, rng);
    EXPECT_EQ(apply_window(s, WindowKind::none), s);
}

TEST(ApplyWindow, OnesBecomeTheTaper) {
    const FeatureStack ones{{4, 4}, 1, {RealArray(Grid2{4, 4}, 1.0)}};
    EXPECT_EQ(apply_window(ones, WindowKind::cosine).channels[0], cosine_window({4, 4}));
}

TEST(CosineWindow, ClosedForm) {
    const Grid2 g{7, 10};
    const RealArray w = cosine_window(g);
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            const double wr = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * r / (g.rows - 1));
            const double wc = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * c / (g.cols - 1));
            EXPECT_NEAR(w(r, c), wr * wc, 1e-15);
        }
    }
    EXPECT_NEAR(w(0, 4), 0.0, 1e-15);
    EXPECT_NEAR(w(3, 9), 0.0, 1e-15);
    EXPECT_NEAR(w(3, 0), 0.0, 1e-15);
    EXPECT_NEAR(w(3, 4) + w(3, 5), 2 * w(3, 4), 1e-15);  // symmetric maximum across the center pair
    for (double v : w) EXPECT_LE(v, w(3, 4) + 1e-15);
}

TEST(ExternalChannels, ZerosFileLoads) {
    const fs::path path = temp_file("zeros.cfb");
    const FeatureStack zeros{{4, 4}, 1, std::vector<RealArray>(3, RealArray(Grid2{4, 4}, 0.0))};
    save_external_channels(path, zeros);
    EXPECT_EQ(fs::file_size(path), 16u + 3u * 16u * 4u);
    EXPECT_EQ(load_external_channels(path, {4, 4}), zeros);
    fs::remove(path);
}

TEST(ExternalChannels, RoundTripIsBitwiseForFloatValues) {
    ref::Rng rng(32);
    FeatureStack s = ref::random_stack({6, 7}, 5, rng);
    for (auto& ch : s.channels) {
        for (double& v : ch) v = static_cast<double>(static_cast<float>(v));
    }
    const fs::path path = temp_file("rt.cfb");
    save_external_channels(path, s);
    EXPECT_EQ(load_external_channels(path, {6, 7}), s);
    fs::remove(path);
}

TEST(ExternalChannels, ByteLayoutIsLittleEndianChannelMajor) {
    FeatureStack s{{1, 2}, 1, {RealArray(Grid2{1, 2}, std::vector<double>{1.0, -2.0})}};
    const fs::path path = temp_file("layout.cfb");
    save_external_channels(path, s);
    std::ifstream is(path, std::ios::binary);
    std::vector<unsigned char> b((std::istreambuf_iterator<char>(is)), {});
    const std::vector<unsigned char> expected{'C', 'F', 'B', '1', 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0,
                                              0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
    EXPECT_EQ(b, expected);
    fs::remove(path);
}

TEST(ExternalChannels, DistinctErrors) {
    const fs::path path = temp_file("bad.cfb");
    const FeatureStack s{{2, 2}, 1, {RealArray(Grid2{2, 2}, 1.0)}};
    save_external_channels(path, s);
    EXPECT_THROW(load_external_channels(path, {2, 3}), GridMismatch);

    {
        std::ofstream os(path, std::ios::binary);
        os << "XXXX";
    }
    EXPECT_THROW(load_external_channels(path, {2, 2}), ParseError);

    {
        std::ofstream os(path, std::ios::binary);
        const unsigned char hdr[] = {'C', 'F', 'B', '1', 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0x00, 0x00, 0xc0, 0x7f};
        os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    }
    EXPECT_THROW(load_external_channels(path, {1, 1}), NonFiniteValue);

    {
        std::ofstream os(path, std::ios::binary);
        const unsigned char hdr[] = {'C', 'F', 'B', '1', 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0x00};
        os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    }
    EXPECT_THROW(load_external_channels(path, {1, 1}), ParseError);
    fs::remove(path);
    EXPECT_THROW(load_external_channels(path, {1, 1}), DataError);
}

TEST(ExtractFeatureWindow, GridIndependentOfMapSize) {
    ref::Rng rng(33);
    FeatureStack map = ref::random_stack({30, 40}, 2, rng);
    map.cell_size = 4;
    const FeatureStack w = extract_feature_window(map, {80.0, 60.0}, {32.0, 24.0}, 1.0, {6, 8});
    EXPECT_EQ(w.grid, (Grid2{6, 8}));
    EXPECT_EQ(w.depth(), 2);
    // Cell-aligned window at unit scale copies map cells.
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 8; ++c) EXPECT_NEAR(w.channels[1](r, c), map.channels[1](12 + r, 16 + c), 1e-12);
    }
}
