#include "gripflow/slip_detector.hpp"

#include <cmath>

#include "gripflow/errors.hpp"

namespace gripflow {

void RoiSpec::validate(int width, int height) const {
    if (radius <= 0.0) throw ConfigError("roi: radius must be positive");
    if (border_margin < 0.0 || border_margin >= radius)
        throw ConfigError("roi: need radius > border_margin >= 0");
    if (cx - radius < 0.0 || cx + radius > width - 1 || cy - radius < 0.0 ||
        cy + radius > height - 1)
        throw ConfigError("roi: circle must fit inside the frame");
}

void DetectorConfig::validate() const {
    if (tau_y <= 0.0 || tau_x <= 0.0) throw ParameterError("detector: thresholds must be > 0");
    if (debounce < 1) throw ParameterError("detector: debounce must be >= 1");
    if (static_tol <= 0.0) throw ParameterError("detector: static_tol must be > 0");
    if (force_step <= 0.0 || force_step > force_max)
        throw ParameterError("detector: need 0 < force_step <= force_max");
    if (force_init < 0.0 || force_init > force_max)
        throw ParameterError("detector: force_init must lie in [0, force_max]");
}

RegionMasks build_masks(const RoiSpec& roi, int width, int height) {
    roi.validate(width, height);
    RegionMasks masks;
    masks.width = width;
    masks.height = height;
    const size_t n = static_cast<size_t>(width) * height;
    masks.inside.assign(n, 0);
    masks.outside.assign(n, 0);

    const double r_in = roi.radius - roi.border_margin;
    const double r_out = roi.radius + roi.border_margin;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dx = x - roi.cx;
            const double dy = y - roi.cy;
            const double dist = std::sqrt(dx * dx + dy * dy);
            const size_t i = static_cast<size_t>(y) * width + x;
            if (dist <= r_in) {
                masks.inside[i] = 1;
                ++masks.inside_count;
            } else if (dist >= r_out) {
                masks.outside[i] = 1;
                ++masks.outside_count;
            }
        }
    }
    if (masks.inside_count == 0) throw ConfigError("roi: inside region is empty");
    if (masks.outside_count == 0) throw ConfigError("roi: housing region is empty");
    return masks;
}

std::pair<double, double> mean_roi_velocity(const FlowField& flow, const RegionMasks& masks) {
    if (flow.width != masks.width || flow.height != masks.height)
        throw DimensionError("mean_roi_velocity: flow and masks must share dimensions");
    double sum_u = 0.0, sum_v = 0.0;
    const size_t n = static_cast<size_t>(flow.width) * flow.height;
    for (size_t i = 0; i < n; ++i) {
        if (masks.inside[i]) {
            sum_u += flow.u[i];
            sum_v += flow.v[i];
        }
    }
    return {sum_u / masks.inside_count, sum_v / masks.inside_count};
}

std::pair<double, bool> static_check(const FlowField& flow, const RegionMasks& masks,
                                     double static_tol) {
    if (flow.width != masks.width || flow.height != masks.height)
        throw DimensionError("static_check: flow and masks must share dimensions");
    double sum_mag = 0.0;
    const size_t n = static_cast<size_t>(flow.width) * flow.height;
    for (size_t i = 0; i < n; ++i) {
        if (masks.outside[i]) sum_mag += std::sqrt(flow.u[i] * flow.u[i] + flow.v[i] * flow.v[i]);
    }
    const double residual = sum_mag / masks.outside_count;
    return {residual, residual <= static_tol};
}

MotionState raw_classify(double vx, double vy, const DetectorConfig& config) {
    // Slip wins over rotation: it is the safety-critical state.
    if (std::abs(vy) > config.tau_y) return MotionState::Slipping;
    if (std::abs(vx) > config.tau_x) return MotionState::Rotating;
    return MotionState::Stable;
}

Debouncer::Debouncer(int debounce) : debounce_(debounce) {
    if (debounce < 1) throw ParameterError("debouncer: debounce must be >= 1");
}

MotionState Debouncer::update(MotionState raw) {
    if (raw == reported_) {
        candidate_ = reported_;
        run_length_ = 0;
        return reported_;
    }
    if (raw == candidate_) {
        ++run_length_;
    } else {
        candidate_ = raw;
        run_length_ = 1;
    }
    if (run_length_ >= debounce_) {
        reported_ = candidate_;
        run_length_ = 0;
    }
    return reported_;
}

GripCommand react(const SlipState& state, const DetectorConfig& config, double current_force) {
    if (current_force < 0.0 || current_force > config.force_max)
        throw ParameterError("react: current_force out of [0, force_max]");

    GripCommand command;
    if (state.state == MotionState::Slipping) {
        if (config.policy == ReactionPolicy::AutoTighten &&
            current_force + config.force_step <= config.force_max) {
            command.kind = CommandKind::IncreaseForce;
            command.new_force = current_force + config.force_step;
        } else {
            command.kind = CommandKind::SlipError;
        }
    } else {
        command.kind = CommandKind::NoAction;
    }
    // The diagnostic accompanies, never suppresses, the slip decision; with
    // nothing else to report it becomes the command itself.
    if (state.camera_suspect && command.kind == CommandKind::NoAction)
        command.kind = CommandKind::CameraError;
    return command;
}

SlipDetector::SlipDetector(const RoiSpec& roi, const DetectorConfig& config,
                           const FarnebackParams& params, int width, int height)
    : config_(config),
      params_(params),
      masks_(build_masks(roi, width, height)),
      debouncer_(config.debounce),
      force_(config.force_init) {
    config_.validate();
    params_.validate();
}

GripEvent SlipDetector::process_frame(const Frame& f_prev, const Frame& f_curr) {
    if (f_prev.width != masks_.width || f_prev.height != masks_.height)
        throw DimensionError("process_frame: frame dims do not match the configured masks");

    const FlowField flow = estimate_flow_dense(f_prev, f_curr, params_);
    const auto [vx, vy] = mean_roi_velocity(flow, masks_);
    const auto [residual, ok] = static_check(flow, masks_, config_.static_tol);

    SlipState state;
    state.state = debouncer_.update(raw_classify(vx, vy, config_));
    state.camera_suspect = !ok;

    GripEvent event;
    event.frame_index = f_curr.timestamp_index;
    event.state = state;
    event.vx = vx;
    event.vy = vy;
    event.static_residual = residual;
    event.command = react(state, config_, force_);
    if (event.command.kind == CommandKind::IncreaseForce) force_ = event.command.new_force;
    event.force = force_;
    return event;
}

} // namespace gripflow
