#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gripflow/image.hpp"
#include "gripflow/slip_detector.hpp"

namespace gripflow {

// SplitMix64: the fixed, portable generator behind every random quantity in
// the simulator. Sequences are bit-reproducible for a given seed on any
// platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    // Uniform double in [0,1).
    double next_double();
    // Standard normal via Box-Muller (fixed algorithm, no library
    // distributions, so streams stay portable).
    double next_gaussian();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

enum class MotionKind { Static, Slip, RotateInGrasp, Spin };

// One segment of target motion. Slip translates along y, rotate-in-grasp
// translates along x (the spinning surface passing the lens), spin rotates
// in-plane about the ROI center.
struct MotionSegment {
    int start_frame = 0;
    MotionKind kind = MotionKind::Static;
    double value = 0.0; // px/frame for slip/rotate, radians/frame for spin
};

struct MotionModel {
    std::vector<MotionSegment> segments; // start frames strictly increasing

    static MotionModel static_scene();
    static MotionModel slip(double vy);
    static MotionModel rotate_in_grasp(double vx);
    static MotionModel spin(double omega);
    static MotionModel mixed(std::vector<MotionSegment> segments);

    // Segment active at frame t (the motion from frame t-1 to t).
    const MotionSegment& active_at(int t) const;
    void validate() const;
};

struct Scenario {
    std::uint64_t seed = 1;
    int width = 320;
    int height = 240;
    RoiSpec roi{160.0, 120.0, 90.0, 16.0};
    MotionModel motion = MotionModel::static_scene();
    int num_frames = 2;
    double texture_cutoff = 0.25;    // spatial-frequency fraction, (0,1]
    double illumination_drift = 0.0; // additive intensity per frame, ROI only
    double noise_sigma = 0.0;        // per-pixel Gaussian intensity noise
    double tau_x = 1.0;              // thresholds used for truth labels
    double tau_y = 1.0;

    void validate() const;
};

struct GroundTruth {
    std::vector<double> vx; // true mean ROI velocity per frame, px/frame
    std::vector<double> vy;
    std::vector<MotionState> state;
};

// Band-limited random texture: seeded white noise, Gaussian low-pass with
// sigma = 1/cutoff, affinely rescaled to span [0.2, 0.8].
Frame make_texture(std::uint64_t seed, int width, int height, double cutoff);

// Bilinear sample with periodic tiling, so cumulative motion never runs out
// of content.
double sample_periodic(const Frame& texture, double x, double y);

// The texture with its content moved by (dx, dy): output(p) = texture(p - d),
// sampled periodically. Ground truth for pure-translation flow tests.
Frame translate_frame(const Frame& texture, double dx, double dy);

// Scene at frame t: moving texture inside the ROI circle, fixed housing with
// a static ring highlight outside, plus optional illumination drift (ROI
// only) and per-frame seeded noise.
Frame render_frame(const Scenario& scenario, int t);

// All frames plus the analytic truth track.
std::pair<std::vector<Frame>, GroundTruth> generate_sequence(const Scenario& scenario);

} // namespace gripflow
