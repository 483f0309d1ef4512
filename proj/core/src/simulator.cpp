#include "gripflow/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gripflow/errors.hpp"

namespace gripflow {

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
}

namespace {

// splitmix64 finalizer, used to decorrelate per-frame noise streams from the
// scenario seed.
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t frame_noise_seed(std::uint64_t seed, int t) {
    return mix64(seed ^ mix64(static_cast<std::uint64_t>(t) + 0x9E3779B97F4A7C15ULL));
}

} // namespace

MotionModel MotionModel::static_scene() {
    return MotionModel{{{0, MotionKind::Static, 0.0}}};
}

MotionModel MotionModel::slip(double vy) {
    return MotionModel{{{0, MotionKind::Slip, vy}}};
}

MotionModel MotionModel::rotate_in_grasp(double vx) {
    return MotionModel{{{0, MotionKind::RotateInGrasp, vx}}};
}

MotionModel MotionModel::spin(double omega) {
    return MotionModel{{{0, MotionKind::Spin, omega}}};
}

MotionModel MotionModel::mixed(std::vector<MotionSegment> segments) {
    MotionModel model{std::move(segments)};
    model.validate();
    return model;
}

const MotionSegment& MotionModel::active_at(int t) const {
    size_t active = 0;
    for (size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].start_frame <= t) active = i;
    }
    return segments[active];
}

void MotionModel::validate() const {
    if (segments.empty()) throw ParameterError("motion model: needs at least one segment");
    if (segments.front().start_frame != 0)
        throw ParameterError("motion model: first segment must start at frame 0");
    for (size_t i = 1; i < segments.size(); ++i) {
        if (segments[i].start_frame <= segments[i - 1].start_frame)
            throw ParameterError("motion model: segment start frames must strictly increase");
    }
}

void Scenario::validate() const {
    if (width < 1 || height < 1) throw ParameterError("scenario: dims must be positive");
    if (num_frames < 2) throw ParameterError("scenario: num_frames must be >= 2");
    if (texture_cutoff <= 0.0 || texture_cutoff > 1.0)
        throw ParameterError("scenario: texture_cutoff must be in (0, 1]");
    if (noise_sigma < 0.0) throw ParameterError("scenario: noise_sigma must be >= 0");
    if (tau_x <= 0.0 || tau_y <= 0.0) throw ParameterError("scenario: thresholds must be > 0");
    roi.validate(width, height);
    motion.validate();
}

Frame make_texture(std::uint64_t seed, int width, int height, double cutoff) {
    if (cutoff <= 0.0 || cutoff > 1.0)
        throw ParameterError("make_texture: cutoff must be in (0, 1]");
    Frame noise(width, height);
    SplitMix64 rng(seed);
    for (double& v : noise.intensities) v = rng.next_double();

    Frame smooth = gaussian_blur(noise, 1.0 / cutoff);

    const auto [lo_it, hi_it] =
        std::minmax_element(smooth.intensities.begin(), smooth.intensities.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi > lo) {
        const double scale = 0.6 / (hi - lo);
        for (double& v : smooth.intensities) v = 0.2 + (v - lo) * scale;
    } else {
        std::fill(smooth.intensities.begin(), smooth.intensities.end(), 0.2);
    }
    return smooth;
}

double sample_periodic(const Frame& texture, double x, double y) {
    const int w = texture.width;
    const int h = texture.height;
    const double xf = std::floor(x);
    const double yf = std::floor(y);
    const double fx = x - xf;
    const double fy = y - yf;
    const auto wrap = [](double base, int n) {
        int m = static_cast<int>(std::fmod(base, static_cast<double>(n)));
        if (m < 0) m += n;
        return m;
    };
    const int x0 = wrap(xf, w);
    const int y0 = wrap(yf, h);
    const int x1 = x0 + 1 == w ? 0 : x0 + 1;
    const int y1 = y0 + 1 == h ? 0 : y0 + 1;
    const double top = texture.at(x0, y0) * (1.0 - fx) + texture.at(x1, y0) * fx;
    const double bot = texture.at(x0, y1) * (1.0 - fx) + texture.at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

Frame translate_frame(const Frame& texture, double dx, double dy) {
    Frame out(texture.width, texture.height);
    for (int y = 0; y < texture.height; ++y) {
        for (int x = 0; x < texture.width; ++x) {
            out.at(x, y) = sample_periodic(texture, x - dx, y - dy);
        }
    }
    return out;
}

namespace {

// Cumulative target pose from frame 0 to frame t: translation plus in-plane
// angle about the ROI center.
struct Pose {
    double dx = 0.0, dy = 0.0;
    double theta = 0.0;
};

Pose cumulative_pose(const MotionModel& motion, int t) {
    Pose pose;
    for (int tau = 1; tau <= t; ++tau) {
        const MotionSegment& seg = motion.active_at(tau);
        switch (seg.kind) {
        case MotionKind::Static: break;
        case MotionKind::Slip: pose.dy += seg.value; break;
        case MotionKind::RotateInGrasp: pose.dx += seg.value; break;
        case MotionKind::Spin: pose.theta += seg.value; break;
        }
    }
    return pose;
}

Frame render_with_texture(const Scenario& scenario, const Frame& texture, int t) {
    const Pose pose = cumulative_pose(scenario.motion, t);
    const double cos_t = std::cos(-pose.theta);
    const double sin_t = std::sin(-pose.theta);
    const double cx = scenario.roi.cx;
    const double cy = scenario.roi.cy;
    const double radius = scenario.roi.radius;
    const double drift = scenario.illumination_drift * t;

    Frame out(scenario.width, scenario.height);
    out.timestamp_index = t;
    for (int y = 0; y < scenario.height; ++y) {
        for (int x = 0; x < scenario.width; ++x) {
            const double rx = x - cx;
            const double ry = y - cy;
            const double dist = std::sqrt(rx * rx + ry * ry);
            double v;
            if (dist <= radius) {
                // Undo the cumulative motion: rotate back about the center,
                // then subtract the cumulative translation.
                const double sx = cos_t * rx - sin_t * ry + cx - pose.dx;
                const double sy = sin_t * rx + cos_t * ry + cy - pose.dy;
                v = sample_periodic(texture, sx, sy) + drift;
            } else {
                const double ring = dist - (radius + 8.0);
                v = 0.05 + 0.1 * std::exp(-ring * ring / 8.0);
            }
            out.at(x, y) = v;
        }
    }

    if (scenario.noise_sigma > 0.0) {
        SplitMix64 rng(frame_noise_seed(scenario.seed, t));
        for (double& v : out.intensities) v += scenario.noise_sigma * rng.next_gaussian();
    }
    for (double& v : out.intensities) v = std::clamp(v, 0.0, 1.0);
    return out;
}

} // namespace

Frame render_frame(const Scenario& scenario, int t) {
    scenario.validate();
    if (t < 0 || t >= scenario.num_frames)
        throw ParameterError("render_frame: t out of range");
    const Frame texture =
        make_texture(scenario.seed, scenario.width, scenario.height, scenario.texture_cutoff);
    return render_with_texture(scenario, texture, t);
}

std::pair<std::vector<Frame>, GroundTruth> generate_sequence(const Scenario& scenario) {
    scenario.validate();
    const Frame texture =
        make_texture(scenario.seed, scenario.width, scenario.height, scenario.texture_cutoff);

    std::vector<Frame> frames;
    frames.reserve(scenario.num_frames);
    GroundTruth truth;
    truth.vx.resize(scenario.num_frames, 0.0);
    truth.vy.resize(scenario.num_frames, 0.0);
    truth.state.resize(scenario.num_frames, MotionState::Stable);

    DetectorConfig label_config;
    label_config.tau_x = scenario.tau_x;
    label_config.tau_y = scenario.tau_y;

    for (int t = 0; t < scenario.num_frames; ++t) {
        frames.push_back(render_with_texture(scenario, texture, t));
        if (t == 0) continue; // no motion before the first frame
        const MotionSegment& seg = scenario.motion.active_at(t);
        switch (seg.kind) {
        case MotionKind::Static:
        case MotionKind::Spin: // mean translational velocity vanishes by symmetry
            break;
        case MotionKind::Slip: truth.vy[t] = seg.value; break;
        case MotionKind::RotateInGrasp: truth.vx[t] = seg.value; break;
        }
        truth.state[t] = raw_classify(truth.vx[t], truth.vy[t], label_config);
    }
    return {std::move(frames), truth};
}

} // namespace gripflow
