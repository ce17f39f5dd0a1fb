#include "cftrack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace cftrack {

void SyntheticSpec::validate() const {
    if (frame_width < 1 || frame_height < 1) throw InvalidArgument("frame size must be positive");
    if (length < 1) throw InvalidArgument("sequence length must be >= 1");
    if (!(object_width > 0.0) || !(object_height > 0.0)) throw InvalidArgument("blob size must be positive");
    if (!(scale_ramp > 0.0) || !std::isfinite(scale_ramp)) throw InvalidArgument("scale_ramp must be positive");
    if (!std::isfinite(start_x) || !std::isfinite(start_y) || !std::isfinite(velocity_x) ||
        !std::isfinite(velocity_y)) {
        throw InvalidArgument("blob position and velocity must be finite");
    }
    if (!(background_contrast >= 0.0) || !(noise_sigma >= 0.0)) {
        throw InvalidArgument("background_contrast and noise_sigma must be >= 0");
    }
    if (background_cell < 1 || texture_cells < 2) throw InvalidArgument("background_cell >= 1, texture_cells >= 2");
    const double grow = std::max(1.0, std::pow(scale_ramp, length - 1));
    if (object_width * grow > frame_width || object_height * grow > frame_height) {
        throw InvalidArgument("blob (" + std::to_string(object_width * grow) + " x " +
                              std::to_string(object_height * grow) + ") is larger than the frame");
    }
    for (int f : occluded_frames) {
        if (f < 0 || f >= length) throw InvalidArgument("occluded frame " + std::to_string(f) + " out of range");
    }
}

BoxRect synthetic_truth(const SyntheticSpec& spec, int t) {
    const double s = std::pow(spec.scale_ramp, t);
    return BoxRect::from_center({spec.start_x + spec.velocity_x * t, spec.start_y + spec.velocity_y * t},
                                {spec.object_width * s, spec.object_height * s});
}

namespace {

RealArray random_nodes(Grid2 grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RealArray a(grid);
    for (double& v : a) v = u(rng);
    return a;
}

}  // namespace

AnnotatedSequence generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);

    const int W = spec.frame_width;
    const int H = spec.frame_height;
    const RealArray bg_nodes = random_nodes({H / spec.background_cell + 2, W / spec.background_cell + 2}, rng);
    const RealArray tex_nodes = random_nodes({spec.texture_cells, spec.texture_cells}, rng);

    RealArray background({H, W});
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double n = sample_bilinear(bg_nodes, (y + 0.5) / spec.background_cell,
                                             (x + 0.5) / spec.background_cell);
            background(y, x) = kIntensityMax * (0.4 + spec.background_contrast * (n - 0.5));
        }
    }

    AnnotatedSequence seq;
    seq.name = "synthetic";
    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
    const double last = spec.texture_cells - 1;

    for (int t = 0; t < spec.length; ++t) {
        const BoxRect box = synthetic_truth(spec, t);
        RealArray pixels = background;
        const bool occluded =
            std::find(spec.occluded_frames.begin(), spec.occluded_frames.end(), t) != spec.occluded_frames.end();

        if (!occluded) {
            const Point2 c = box.center();
            const double rx = box.width / 2.0;
            const double ry = box.height / 2.0;
            const double edge = std::min(rx, ry) / 2.0;  // alpha reaches 1 about 2 px inside the rim
            const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
            const int x1 = std::min(W - 1, static_cast<int>(std::ceil(box.x + box.width)));
            const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
            const int y1 = std::min(H - 1, static_cast<int>(std::ceil(box.y + box.height)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const double dx = (x + 0.5 - c.x) / rx;
                    const double dy = (y + 0.5 - c.y) / ry;
                    const double alpha = std::clamp((1.0 - std::sqrt(dx * dx + dy * dy)) * edge, 0.0, 1.0);
                    if (alpha <= 0.0) continue;
                    const double u = std::clamp((x + 0.5 - box.x) / box.width, 0.0, 1.0);
                    const double v = std::clamp((y + 0.5 - box.y) / box.height, 0.0, 1.0);
                    const double tex = kIntensityMax * (0.1 + 0.9 * sample_bilinear(tex_nodes, v * last, u * last));
                    pixels(y, x) = (1.0 - alpha) * pixels(y, x) + alpha * tex;
                }
            }
        }
        if (spec.noise_sigma > 0.0) {
            for (double& p : pixels) p += noise(rng);
        }

        FrameRef ref;
        ref.image = std::make_shared<const Image>(std::move(pixels));
        seq.frames.push_back(std::move(ref));
        seq.truth.push_back(box);
    }
    return seq;
}

void write_sequence(const AnnotatedSequence& sequence, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < sequence.frames.size(); ++i) {
        const FrameRef& ref = sequence.frames[i];
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.png", i + 1);
        write_image(dir / name, ref.image ? *ref.image : read_image(ref.image_path));
    }
    std::ofstream os(dir / kAnnotationNames[0], std::ios::binary);
    if (!os) throw DataError("cannot write annotations in " + dir.string());
    for (const auto& box : sequence.truth) {
        if (box) {
            os << format_number(box->x) << ',' << format_number(box->y) << ',' << format_number(box->width) << ','
               << format_number(box->height) << '\n';
        } else {
            os << "NaN,NaN,NaN,NaN\n";
        }
    }
}

}  // namespace cftrack
