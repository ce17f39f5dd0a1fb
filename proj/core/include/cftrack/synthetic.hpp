#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cftrack/eval.hpp"

namespace cftrack {

/// Textured elliptical blob moving over a static noise background.
struct SyntheticSpec {
    int frame_width = 200;
    int frame_height = 120;
    int length = 50;
    double object_width = 24.0;
    double object_height = 24.0;
    double start_x = 48.0;  // object center in frame 0
    double start_y = 60.0;
    double velocity_x = 2.0;  // pixels per frame
    double velocity_y = 0.0;
    double scale_ramp = 1.0;  // object size multiplies by this every frame
    std::vector<int> occluded_frames;  // 0-based; the blob is not drawn there
    double background_contrast = 0.3;  // fraction of the intensity range
    int background_cell = 8;  // pixels per random background node
    int texture_cells = 5;    // random texture nodes across the blob
    double noise_sigma = 0.0; // per-frame i.i.d. Gaussian noise, intensity units

    /// Throws InvalidArgument, e.g. when the blob outgrows the frame.
    void validate() const;
};

/// Truth box of frame t, computed from the spec alone.
BoxRect synthetic_truth(const SyntheticSpec& spec, int t);

/// Frames live in memory (FrameRef::image). Same spec and seed give
/// bitwise-identical frames.
AnnotatedSequence generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Writes frames as 000001.png, ... plus groundtruth_rect.txt, the layout
/// load_sequence reads. Box values use round-trip decimal form.
void write_sequence(const AnnotatedSequence& sequence, const std::filesystem::path& dir);

}  // namespace cftrack
