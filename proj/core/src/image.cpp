#include "cftrack/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

namespace cftrack {

double sample_bilinear(const RealArray& img, double row, double col) noexcept {
    const int h = img.rows();
    const int w = img.cols();
    row = std::clamp(row, 0.0, static_cast<double>(h - 1));
    col = std::clamp(col, 0.0, static_cast<double>(w - 1));
    const int r0 = static_cast<int>(std::floor(row));
    const int c0 = static_cast<int>(std::floor(col));
    const int r1 = std::min(r0 + 1, h - 1);
    const int c1 = std::min(c0 + 1, w - 1);
    const double fr = row - r0;
    const double fc = col - c0;
    const double top = img(r0, c0) * (1.0 - fc) + img(r0, c1) * fc;
    const double bottom = img(r1, c0) * (1.0 - fc) + img(r1, c1) * fc;
    return top * (1.0 - fr) + bottom * fr;
}

Image read_image(const std::filesystem::path& path) {
    cv::Mat raw = cv::imread(path.string(), cv::IMREAD_GRAYSCALE | cv::IMREAD_ANYDEPTH);
    if (raw.empty()) throw DataError("cannot decode image " + path.string());
    cv::Mat gray;
    const double scale = raw.depth() == CV_16U ? 255.0 / 65535.0 : 1.0;
    raw.convertTo(gray, CV_64F, scale);

    Image out(gray.cols, gray.rows);
    for (int r = 0; r < gray.rows; ++r) {
        const double* src = gray.ptr<double>(r);
        std::copy(src, src + gray.cols, &out.pixels(r, 0));
    }
    return out;
}

void write_image(const std::filesystem::path& path, const Image& image) {
    cv::Mat out(image.height(), image.width(), CV_8UC1);
    for (int r = 0; r < image.height(); ++r) {
        auto* dst = out.ptr<unsigned char>(r);
        for (int c = 0; c < image.width(); ++c) {
            const double v = std::clamp(image.pixels(r, c), 0.0, kIntensityMax);
            dst[c] = static_cast<unsigned char>(std::lround(v));
        }
    }
    if (!cv::imwrite(path.string(), out)) throw DataError("cannot write image " + path.string());
}

}  // namespace cftrack
