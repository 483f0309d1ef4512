#pragma once

#include <vector>

#include "gripflow/errors.hpp"

namespace gripflow {

// Single-channel intensity image. Values live in [0,1]; 8-bit quantization
// happens only at the file I/O boundary.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<double> intensities; // row-major, width*height
    int timestamp_index = 0;
    double frame_interval = 1.0 / 30.0; // seconds per frame

    Frame() = default;
    Frame(int w, int h, double fill = 0.0);

    double& at(int x, int y) { return intensities[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return intensities[static_cast<size_t>(y) * width + x]; }

    // Reads with coordinates clamped to the frame rectangle.
    double at_clamped(int x, int y) const;
    // Bilinear sample at a subpixel position, clamp-to-edge outside the frame.
    double sample_bilinear(double x, double y) const;

    bool same_dims(const Frame& other) const {
        return width == other.width && height == other.height;
    }
};

// Planar 3-channel image, channels in [0,1].
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<double> r, g, b;

    RgbImage() = default;
    RgbImage(int w, int h);
};

// Spatio-temporal derivative grids, same dimensions as the source frames.
struct Gradients {
    int width = 0;
    int height = 0;
    std::vector<double> ix; // dI/dx, intensity per pixel
    std::vector<double> iy; // dI/dy
    std::vector<double> it; // dI/dt, intensity per frame interval
};

// Coarse-to-fine stack of frames; levels[0] is the finest.
struct Pyramid {
    std::vector<Frame> levels;
    double scale = 0.5; // per-level downscale factor, in (0,1)
};

// Rec.601 intensity from a color image.
Frame luma(const RgbImage& rgb);

// Separable Gaussian, kernel truncated at radius ceil(3*sigma), normalized to
// sum 1; clamp-to-edge borders.
Frame gaussian_blur(const Frame& frame, double sigma);

// Anti-aliasing blur followed by bilinear resampling to ceil(dims * scale).
Frame downsample(const Frame& frame, double scale);

// Bilinear resample to an explicit size, blurring first when shrinking.
Frame resize_to(const Frame& frame, int out_width, int out_height);

// Repeated downsample; stops early once a side would fall below 16 px.
Pyramid build_pyramid(const Frame& frame, int num_levels, double scale);

struct FlowField; // flow.hpp

// Moves the frame's content along the flow: output(x,y) = frame sampled at
// (x - u(x,y), y - v(x,y)), clamped. warp(f1, flow) approximates f2 when the
// flow maps f1 to f2.
Frame warp(const Frame& frame, const FlowField& flow);

// Ix, Iy: central differences on the two-frame average (one-sided at the
// borders); It = f2 - f1.
Gradients gradients(const Frame& f1, const Frame& f2);

} // namespace gripflow
