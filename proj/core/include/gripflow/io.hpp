#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gripflow/flow.hpp"
#include "gripflow/image.hpp"
#include "gripflow/slip_detector.hpp"

namespace gripflow {

// ---- PGM / PPM ----

// Binary PGM, magic "P5", maxval 255. Intensities map value/255 on read and
// round(value*255) clamped on write.
Frame read_frame_pgm(const std::filesystem::path& path);
void write_frame_pgm(const Frame& frame, const std::filesystem::path& path);

// Binary PPM "P6", maxval 255.
void write_rgb_ppm(const RgbImage& image, const std::filesystem::path& path);

// Sorted *.pgm paths in a directory; sequence position is the frame index.
std::vector<std::filesystem::path> list_pgm_sequence(const std::filesystem::path& dir);

// ---- .flo flow interchange ----

// Layout: float32 LE 202021.25 tag, int32 LE width, int32 LE height, then
// row-major interleaved (u,v) float32 LE. Values quantize to float32.
void write_flo(const FlowField& flow, const std::filesystem::path& path);
FlowField read_flo(const std::filesystem::path& path);

// ---- event / truth logs ----

struct EventRecord {
    int frame = 0;
    std::string state;   // STABLE | ROTATING | SLIPPING
    double vx = 0.0;
    double vy = 0.0;
    double static_residual = 0.0;
    std::string command; // NO_ACTION | INCREASE_FORCE | SLIP_ERROR | CAMERA_ERROR,
                         // '|'-joined when a camera error accompanies a slip reaction
    double force = 0.0;

    bool operator==(const EventRecord&) const = default;
};

struct TruthRecord {
    int frame = 0;
    double true_vx = 0.0;
    double true_vy = 0.0;
    std::string true_state;

    bool operator==(const TruthRecord&) const = default;
};

EventRecord to_event_record(const GripEvent& event);

void write_events_jsonl(const std::vector<EventRecord>& records, const std::filesystem::path& path);
std::vector<EventRecord> read_events_jsonl(const std::filesystem::path& path);
void write_truth_jsonl(const std::vector<TruthRecord>& records, const std::filesystem::path& path);
std::vector<TruthRecord> read_truth_jsonl(const std::filesystem::path& path);

// ---- flow visualization ----

// Grayscale background with pure-green vectors on a stride lattice; zero flow
// leaves single green dots.
RgbImage render_flow_overlay(const Frame& frame, const FlowField& flow, int stride, double gain);

// ---- line-oriented `key = value` configuration ----

struct KeyValueFile {
    std::map<std::string, std::vector<std::string>> values; // key -> values in file order

    bool has(const std::string& key) const;
    // Last value wins for scalar keys.
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
};

// Parses `key = value` lines with '#' comments. Keys outside `known_keys`
// raise ConfigError naming the line.
KeyValueFile parse_key_value_file(const std::filesystem::path& path,
                                  const std::vector<std::string>& known_keys);

} // namespace gripflow
