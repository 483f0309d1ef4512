// gripflow: synthetic scenario rendering, dense/sparse optical flow, and the
// slip-monitoring pipeline behind one executable.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gripflow/errors.hpp"
#include "gripflow/flow.hpp"
#include "gripflow/image.hpp"
#include "gripflow/io.hpp"
#include "gripflow/simulator.hpp"
#include "gripflow/slip_detector.hpp"

namespace fs = std::filesystem;
using namespace gripflow;

namespace {

// A bad invocation (as opposed to bad file content): exits 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::string frame_filename(int index_one_based) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.pgm", index_one_based);
    return buf;
}

const char* state_name(MotionState state) {
    switch (state) {
    case MotionState::Stable: return "STABLE";
    case MotionState::Rotating: return "ROTATING";
    case MotionState::Slipping: return "SLIPPING";
    }
    return "STABLE";
}

std::vector<Frame> load_sequence(const fs::path& dir, int min_frames) {
    const auto paths = list_pgm_sequence(dir);
    if (static_cast<int>(paths.size()) < min_frames)
        throw UsageError("need at least " + std::to_string(min_frames) + " .pgm frames in " +
                         dir.string() + ", found " + std::to_string(paths.size()));
    std::vector<Frame> frames;
    frames.reserve(paths.size());
    for (size_t i = 0; i < paths.size(); ++i) {
        frames.push_back(read_frame_pgm(paths[i]));
        frames.back().timestamp_index = static_cast<int>(i);
    }
    return frames;
}

// ---- scenario files ----

const std::vector<std::string> kScenarioKeys = {
    "seed",       "width",    "height",         "roi_cx",
    "roi_cy",     "roi_radius", "roi_margin",   "num_frames",
    "texture_cutoff", "illumination_drift", "noise_sigma", "tau_x",
    "tau_y",      "motion",   "value",          "segment"};

MotionKind parse_motion_kind(const std::string& token) {
    if (token == "STATIC") return MotionKind::Static;
    if (token == "SLIP") return MotionKind::Slip;
    if (token == "ROTATE_IN_GRASP") return MotionKind::RotateInGrasp;
    if (token == "SPIN") return MotionKind::Spin;
    throw ConfigError("unknown motion kind \"" + token + "\"");
}

Scenario parse_scenario_file(const fs::path& path) {
    const KeyValueFile kv = parse_key_value_file(path, kScenarioKeys);

    Scenario scenario;
    scenario.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
    scenario.width = kv.get_int("width", scenario.width);
    scenario.height = kv.get_int("height", scenario.height);
    scenario.roi.cx = kv.get_double("roi_cx", scenario.roi.cx);
    scenario.roi.cy = kv.get_double("roi_cy", scenario.roi.cy);
    scenario.roi.radius = kv.get_double("roi_radius", scenario.roi.radius);
    scenario.roi.border_margin = kv.get_double("roi_margin", scenario.roi.border_margin);
    scenario.num_frames = kv.get_int("num_frames", scenario.num_frames);
    scenario.texture_cutoff = kv.get_double("texture_cutoff", scenario.texture_cutoff);
    scenario.illumination_drift = kv.get_double("illumination_drift", 0.0);
    scenario.noise_sigma = kv.get_double("noise_sigma", 0.0);
    scenario.tau_x = kv.get_double("tau_x", scenario.tau_x);
    scenario.tau_y = kv.get_double("tau_y", scenario.tau_y);

    const std::string motion = kv.get("motion", "STATIC");
    if (motion == "MIXED") {
        const auto it = kv.values.find("segment");
        if (it == kv.values.end() || it->second.empty())
            throw ConfigError(path.string() + ": motion = MIXED needs segment lines");
        std::vector<MotionSegment> segments;
        for (const std::string& text : it->second) {
            MotionSegment seg;
            char kind_token[32] = {0};
            double value = 0.0;
            const int n = std::sscanf(text.c_str(), "%d %31s %lf", &seg.start_frame, kind_token,
                                      &value);
            if (n < 2)
                throw ConfigError(path.string() + ": bad segment \"" + text +
                                  "\", expected <start_frame> <kind> [value]");
            seg.kind = parse_motion_kind(kind_token);
            seg.value = n >= 3 ? value : 0.0;
            segments.push_back(seg);
        }
        scenario.motion = MotionModel::mixed(std::move(segments));
    } else {
        const double value = kv.get_double("value", 0.0);
        switch (parse_motion_kind(motion)) {
        case MotionKind::Static: scenario.motion = MotionModel::static_scene(); break;
        case MotionKind::Slip: scenario.motion = MotionModel::slip(value); break;
        case MotionKind::RotateInGrasp: scenario.motion = MotionModel::rotate_in_grasp(value); break;
        case MotionKind::Spin: scenario.motion = MotionModel::spin(value); break;
        }
    }
    scenario.validate();
    return scenario;
}

// ---- solver / detector config files ----

const std::vector<std::string> kParamKeys = {
    "num_levels",   "pyramid_scale", "iterations_per_level", "window_radius",
    "sigma_applic", "avg_radius",    "regularization_eps",   "overlay_stride",
    "overlay_gain"};

const std::vector<std::string> kDetectKeys = {
    "num_levels", "pyramid_scale", "iterations_per_level", "window_radius",
    "sigma_applic", "avg_radius", "regularization_eps", "roi_margin",
    "tau_y", "tau_x", "debounce", "static_tol", "policy", "force_step",
    "force_max", "force_init"};

FarnebackParams parse_params(const KeyValueFile& kv) {
    FarnebackParams params;
    params.num_levels = kv.get_int("num_levels", params.num_levels);
    params.pyramid_scale = kv.get_double("pyramid_scale", params.pyramid_scale);
    params.iterations_per_level = kv.get_int("iterations_per_level", params.iterations_per_level);
    params.window_radius = kv.get_int("window_radius", params.window_radius);
    params.sigma_applic = kv.get_double("sigma_applic", params.sigma_applic);
    params.avg_radius = kv.get_int("avg_radius", params.avg_radius);
    params.regularization_eps = kv.get_double("regularization_eps", params.regularization_eps);
    params.validate();
    return params;
}

DetectorConfig parse_detector_config(const KeyValueFile& kv) {
    DetectorConfig config;
    config.tau_y = kv.get_double("tau_y", config.tau_y);
    config.tau_x = kv.get_double("tau_x", config.tau_x);
    config.debounce = kv.get_int("debounce", config.debounce);
    config.static_tol = kv.get_double("static_tol", config.static_tol);
    const std::string policy = kv.get("policy", "AUTO_TIGHTEN");
    if (policy == "AUTO_TIGHTEN") {
        config.policy = ReactionPolicy::AutoTighten;
    } else if (policy == "REPORT_ONLY") {
        config.policy = ReactionPolicy::ReportOnly;
    } else {
        throw ConfigError("unknown policy \"" + policy + "\"");
    }
    config.force_step = kv.get_double("force_step", config.force_step);
    config.force_max = kv.get_double("force_max", config.force_max);
    config.force_init = kv.get_double("force_init", config.force_init);
    config.validate();
    return config;
}

// ---- subcommands ----

int run_sim(const fs::path& scenario_path, const fs::path& out_dir) {
    const Scenario scenario = parse_scenario_file(scenario_path);
    fs::create_directories(out_dir);

    const auto [frames, truth] = generate_sequence(scenario);
    for (size_t i = 0; i < frames.size(); ++i) {
        write_frame_pgm(frames[i], out_dir / frame_filename(static_cast<int>(i) + 1));
    }

    std::vector<TruthRecord> records(frames.size());
    for (size_t t = 0; t < frames.size(); ++t) {
        records[t].frame = static_cast<int>(t);
        records[t].true_vx = truth.vx[t];
        records[t].true_vy = truth.vy[t];
        records[t].true_state = state_name(truth.state[t]);
    }
    write_truth_jsonl(records, out_dir / "truth.jsonl");
    std::cout << "wrote " << frames.size() << " frames and truth.jsonl to " << out_dir.string()
              << "\n";
    return 0;
}

int run_flow(const fs::path& in_dir, const fs::path& out_dir, const std::string& params_path,
             bool overlay) {
    FarnebackParams params;
    int stride = 10;
    double gain = 5.0;
    if (!params_path.empty()) {
        const KeyValueFile kv = parse_key_value_file(params_path, kParamKeys);
        params = parse_params(kv);
        stride = kv.get_int("overlay_stride", stride);
        gain = kv.get_double("overlay_gain", gain);
    }

    const std::vector<Frame> frames = load_sequence(in_dir, 2);
    fs::create_directories(out_dir);
    for (size_t i = 0; i + 1 < frames.size(); ++i) {
        const FlowField flow = estimate_flow_dense(frames[i], frames[i + 1], params);
        char name[32];
        std::snprintf(name, sizeof(name), "flow_%06d.flo", static_cast<int>(i) + 1);
        write_flo(flow, out_dir / name);
        if (overlay) {
            std::snprintf(name, sizeof(name), "overlay_%06d.ppm", static_cast<int>(i) + 1);
            write_rgb_ppm(render_flow_overlay(frames[i], flow, stride, gain), out_dir / name);
        }
    }
    std::cout << "wrote " << frames.size() - 1 << " flow fields to " << out_dir.string() << "\n";
    return 0;
}

int run_track(const fs::path& in_dir, const fs::path& out_path, int max_points, double quality,
              double min_distance, int window_radius, int num_levels, int max_iters) {
    const std::vector<Frame> frames = load_sequence(in_dir, 2);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw FormatError(out_path.string() + ": cannot open for writing");
    char line[256];
    for (size_t i = 0; i + 1 < frames.size(); ++i) {
        const auto points = detect_features(frames[i], max_points, quality, min_distance);
        const auto tracked =
            track_sparse(frames[i], frames[i + 1], points, window_radius, num_levels, max_iters);
        for (const TrackedPoint& tp : tracked) {
            std::snprintf(line, sizeof(line),
                          "{\"frame\":%d,\"x\":%.6g,\"y\":%.6g,\"dx\":%.6g,\"dy\":%.6g,"
                          "\"tracked\":%s}\n",
                          static_cast<int>(i), tp.x, tp.y, tp.dx, tp.dy,
                          tp.tracked ? "true" : "false");
            out << line;
        }
    }
    if (!out) throw FormatError(out_path.string() + ": write failed");
    std::cout << "wrote tracks for " << frames.size() - 1 << " frame pairs to "
              << out_path.string() << "\n";
    return 0;
}

int run_detect(const fs::path& in_dir, const std::string& roi_text, const std::string& config_path,
               const fs::path& out_path) {
    RoiSpec roi;
    {
        double cx = 0.0, cy = 0.0, r = 0.0;
        if (std::sscanf(roi_text.c_str(), "%lf,%lf,%lf", &cx, &cy, &r) != 3)
            throw UsageError("--roi expects cx,cy,r");
        roi.cx = cx;
        roi.cy = cy;
        roi.radius = r;
        roi.border_margin = 16.0;
    }

    FarnebackParams params;
    DetectorConfig config;
    if (!config_path.empty()) {
        const KeyValueFile kv = parse_key_value_file(config_path, kDetectKeys);
        params = parse_params(kv);
        config = parse_detector_config(kv);
        roi.border_margin = kv.get_double("roi_margin", roi.border_margin);
    }

    const std::vector<Frame> frames = load_sequence(in_dir, 2);
    SlipDetector detector(roi, config, params, frames[0].width, frames[0].height);

    std::vector<EventRecord> records;
    records.reserve(frames.size() - 1);
    for (size_t i = 0; i + 1 < frames.size(); ++i) {
        records.push_back(to_event_record(detector.process_frame(frames[i], frames[i + 1])));
    }
    write_events_jsonl(records, out_path);
    std::cout << "wrote " << records.size() << " events to " << out_path.string() << "\n";
    return 0;
}

int run_eval(const fs::path& events_path, const fs::path& truth_path) {
    const std::vector<EventRecord> events = read_events_jsonl(events_path);
    const std::vector<TruthRecord> truth = read_truth_jsonl(truth_path);

    std::map<int, std::string> reported;
    for (const EventRecord& e : events) reported[e.frame] = e.state;

    // Maximal runs of true SLIPPING frames.
    struct Episode {
        int start, end;
    };
    std::vector<Episode> episodes;
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].true_state != "SLIPPING") continue;
        if (!episodes.empty() && i > 0 && truth[i - 1].true_state == "SLIPPING" &&
            episodes.back().end == truth[i - 1].frame) {
            episodes.back().end = truth[i].frame;
        } else {
            episodes.push_back({truth[i].frame, truth[i].frame});
        }
    }

    int detected = 0;
    double latency_sum = 0.0;
    for (const Episode& ep : episodes) {
        for (int f = ep.start; f <= ep.end; ++f) {
            const auto it = reported.find(f);
            if (it != reported.end() && it->second == "SLIPPING") {
                ++detected;
                latency_sum += f - ep.start;
                break;
            }
        }
    }

    int false_slips = 0;
    int negatives = 0;
    for (const TruthRecord& t : truth) {
        if (t.true_state == "SLIPPING") continue;
        const auto it = reported.find(t.frame);
        if (it == reported.end()) continue;
        ++negatives;
        if (it->second == "SLIPPING") ++false_slips;
    }

    const double recall = episodes.empty() ? 1.0 : static_cast<double>(detected) / episodes.size();
    const double false_rate =
        negatives == 0 ? 0.0 : static_cast<double>(false_slips) / negatives;
    const double mean_latency = detected == 0 ? 0.0 : latency_sum / detected;

    std::printf("slip_episodes %d\n", static_cast<int>(episodes.size()));
    std::printf("slip_recall %.2f\n", recall);
    std::printf("false_slip_rate %.2f\n", false_rate);
    std::printf("mean_latency_frames %.2f\n", mean_latency);
    return 0;
}

int run_bench(const std::string& size_text, int num_frames) {
    int width = 0, height = 0;
    if (std::sscanf(size_text.c_str(), "%dx%d", &width, &height) != 2 || width < 64 ||
        height < 64)
        throw UsageError("--size expects WxH with both sides >= 64");
    if (num_frames < 2) throw UsageError("--frames must be >= 2");

    Scenario scenario;
    scenario.seed = 7;
    scenario.width = width;
    scenario.height = height;
    scenario.roi.cx = width / 2.0;
    scenario.roi.cy = height / 2.0;
    scenario.roi.radius = 0.375 * std::min(width, height);
    scenario.roi.border_margin = std::min(16.0, scenario.roi.radius / 4.0);
    scenario.num_frames = num_frames;
    scenario.motion = MotionModel::slip(2.0);

    const auto [frames, truth] = generate_sequence(scenario);

    DetectorConfig config;
    FarnebackParams params;
    SlipDetector detector(scenario.roi, config, params, width, height);

    const auto start = std::chrono::steady_clock::now();
    double checksum = 0.0;
    for (size_t i = 0; i + 1 < frames.size(); ++i) {
        checksum += detector.process_frame(frames[i], frames[i + 1]).vy;
    }
    const auto stop = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(stop - start).count();
    const int pairs = num_frames - 1;

    std::printf("size %dx%d\n", width, height);
    std::printf("frames %d\n", num_frames);
    std::printf("pairs %d\n", pairs);
    std::printf("elapsed_s %.3f\n", elapsed);
    std::printf("fps %.2f\n", pairs / elapsed);
    std::printf("checksum %.3f\n", checksum); // keeps the loop honest
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optical-flow based slip monitoring for a gripper camera"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("sim", "render a scenario to PGM frames plus a truth track");
    std::string sim_scenario, sim_out;
    sim->add_option("--scenario", sim_scenario, "scenario file (key = value lines)")->required();
    sim->add_option("--out", sim_out, "output directory")->required();

    auto* flow = app.add_subcommand("flow", "dense flow for each consecutive frame pair");
    std::string flow_in, flow_out, flow_params;
    bool flow_overlay = false;
    flow->add_option("--in", flow_in, "directory of .pgm frames")->required();
    flow->add_option("--out", flow_out, "output directory for .flo files")->required();
    flow->add_option("--params", flow_params, "solver parameter file");
    flow->add_flag("--overlay", flow_overlay, "also write PPM overlays with green vectors");

    auto* track = app.add_subcommand("track", "sparse feature tracks per frame pair");
    std::string track_in, track_out;
    int track_max_points = 200, track_window = 5, track_levels = 3, track_iters = 20;
    double track_quality = 0.01, track_min_distance = 8.0;
    track->add_option("--in", track_in, "directory of .pgm frames")->required();
    track->add_option("--out", track_out, "output JSONL file")->required();
    track->add_option("--max-points", track_max_points, "feature budget per frame");
    track->add_option("--quality", track_quality, "corner quality fraction of the global max");
    track->add_option("--min-distance", track_min_distance, "minimum feature spacing, px");
    track->add_option("--window-radius", track_window, "tracking window radius, px");
    track->add_option("--levels", track_levels, "pyramid levels");
    track->add_option("--max-iters", track_iters, "iteration cap per level");

    auto* detect = app.add_subcommand("detect", "full slip-monitoring pipeline over a sequence");
    std::string detect_in, detect_roi, detect_config, detect_out;
    detect->add_option("--in", detect_in, "directory of .pgm frames")->required();
    detect->add_option("--roi", detect_roi, "target circle as cx,cy,r")->required();
    detect->add_option("--config", detect_config, "detector/solver config file");
    detect->add_option("--out", detect_out, "output events JSONL file")->required();

    auto* eval = app.add_subcommand("eval", "score an event log against a truth track");
    std::string eval_events, eval_truth;
    eval->add_option("--events", eval_events, "events JSONL file")->required();
    eval->add_option("--truth", eval_truth, "truth JSONL file")->required();

    auto* bench = app.add_subcommand("bench", "time the dense pipeline on a synthetic sequence");
    std::string bench_size = "320x240";
    int bench_frames = 300;
    bench->add_option("--size", bench_size, "frame size WxH (default 320x240)");
    bench->add_option("--frames", bench_frames, "sequence length (default 300)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sim) return run_sim(sim_scenario, sim_out);
        if (*flow) return run_flow(flow_in, flow_out, flow_params, flow_overlay);
        if (*track)
            return run_track(track_in, track_out, track_max_points, track_quality,
                             track_min_distance, track_window, track_levels, track_iters);
        if (*detect) return run_detect(detect_in, detect_roi, detect_config, detect_out);
        if (*eval) return run_eval(eval_events, eval_truth);
        if (*bench) return run_bench(bench_size, bench_frames);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
