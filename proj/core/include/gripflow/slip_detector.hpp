#pragma once

#include <cstdint>
#include <vector>

#include "gripflow/flow.hpp"
#include "gripflow/image.hpp"

namespace gripflow {

// Circular target region seen through the protective lens. The complement is
// the static camera housing. border_margin pixels on both sides of the circle
// boundary belong to neither region.
struct RoiSpec {
    double cx = 0.0, cy = 0.0;
    double radius = 0.0;
    double border_margin = 0.0;

    void validate(int width, int height) const;
};

struct RegionMasks {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> inside;  // target region, margin removed
    std::vector<std::uint8_t> outside; // housing region, margin removed
    int inside_count = 0;
    int outside_count = 0;
};

enum class MotionState { Stable, Rotating, Slipping };

// Per-frame classification plus the static-region diagnostic.
struct SlipState {
    MotionState state = MotionState::Stable;
    bool camera_suspect = false;
};

enum class ReactionPolicy { AutoTighten, ReportOnly };

enum class CommandKind { NoAction, IncreaseForce, SlipError, CameraError };

struct DetectorConfig {
    double tau_y = 1.0;        // slip threshold, px/frame
    double tau_x = 1.0;        // rotation threshold, px/frame
    int debounce = 3;          // consecutive frames before the report changes
    double static_tol = 0.5;   // max mean housing flow magnitude, px/frame
    ReactionPolicy policy = ReactionPolicy::AutoTighten;
    double force_step = 10.0;  // newtons
    double force_max = 100.0;
    double force_init = 20.0;

    void validate() const;
};

struct GripCommand {
    CommandKind kind = CommandKind::NoAction;
    double new_force = 0.0; // meaningful for IncreaseForce
};

struct GripEvent {
    int frame_index = 0;
    SlipState state;
    double vx = 0.0, vy = 0.0; // mean target velocity, px/frame
    double static_residual = 0.0;
    GripCommand command;
    double force = 0.0; // clamp force after the event
};

RegionMasks build_masks(const RoiSpec& roi, int width, int height);

std::pair<double, double> mean_roi_velocity(const FlowField& flow, const RegionMasks& masks);

// residual = mean flow magnitude over the housing; ok iff residual <= tol.
std::pair<double, bool> static_check(const FlowField& flow, const RegionMasks& masks,
                                     double static_tol);

// Threshold rule for one frame, before debouncing. Slip takes precedence over
// rotation when both thresholds are exceeded.
MotionState raw_classify(double vx, double vy, const DetectorConfig& config);

// Requires `debounce` consecutive identical raw states before the reported
// state changes; starts at Stable.
class Debouncer {
public:
    explicit Debouncer(int debounce);
    MotionState update(MotionState raw);
    MotionState reported() const { return reported_; }

private:
    int debounce_;
    MotionState reported_ = MotionState::Stable;
    MotionState candidate_ = MotionState::Stable;
    int run_length_ = 0;
};

// Reaction rule for one classified frame. current_force must be within
// [0, force_max].
GripCommand react(const SlipState& state, const DetectorConfig& config, double current_force);

// Owns the per-grasp state: region masks, debounce history, and clamp force.
// Frames must arrive strictly in order; one instance serves one grasp.
class SlipDetector {
public:
    SlipDetector(const RoiSpec& roi, const DetectorConfig& config, const FarnebackParams& params,
                 int width, int height);

    // Dense flow between the two frames, then mean-velocity, static-check,
    // classification and reaction, as one event. f_curr's timestamp_index
    // becomes the event's frame index.
    GripEvent process_frame(const Frame& f_prev, const Frame& f_curr);

    const RegionMasks& masks() const { return masks_; }
    double current_force() const { return force_; }

private:
    DetectorConfig config_;
    FarnebackParams params_;
    RegionMasks masks_;
    Debouncer debouncer_;
    double force_;
};

} // namespace gripflow
