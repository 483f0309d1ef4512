#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gripflow/errors.hpp"
#include "gripflow/io.hpp"

namespace gripflow {

namespace {

// 6 significant digits, enough that print -> parse -> print is stable.
std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
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

const char* command_name(CommandKind kind) {
    switch (kind) {
    case CommandKind::NoAction: return "NO_ACTION";
    case CommandKind::IncreaseForce: return "INCREASE_FORCE";
    case CommandKind::SlipError: return "SLIP_ERROR";
    case CommandKind::CameraError: return "CAMERA_ERROR";
    }
    return "NO_ACTION";
}

[[noreturn]] void fail_line(const std::filesystem::path& path, size_t line,
                            const std::string& what) {
    throw FormatError(path.string() + ": line " + std::to_string(line) + ": " + what);
}

nlohmann::json parse_line(const std::filesystem::path& path, size_t line_no,
                          const std::string& line,
                          const std::vector<std::string>& string_keys,
                          const std::vector<std::string>& number_keys) {
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) fail_line(path, line_no, "malformed JSON object");
    for (const auto& key : string_keys) {
        if (!obj.contains(key)) fail_line(path, line_no, "missing key \"" + key + "\"");
        if (!obj[key].is_string()) fail_line(path, line_no, "key \"" + key + "\" must be a string");
    }
    for (const auto& key : number_keys) {
        if (!obj.contains(key)) fail_line(path, line_no, "missing key \"" + key + "\"");
        if (!obj[key].is_number()) fail_line(path, line_no, "key \"" + key + "\" must be a number");
    }
    if (obj.size() != string_keys.size() + number_keys.size()) {
        for (const auto& [key, unused] : obj.items()) {
            if (std::find(string_keys.begin(), string_keys.end(), key) == string_keys.end() &&
                std::find(number_keys.begin(), number_keys.end(), key) == number_keys.end())
                fail_line(path, line_no, "unexpected key \"" + key + "\"");
        }
    }
    return obj;
}

std::vector<std::string> split_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open file");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

} // namespace

EventRecord to_event_record(const GripEvent& event) {
    EventRecord rec;
    rec.frame = event.frame_index;
    rec.state = state_name(event.state.state);
    rec.vx = event.vx;
    rec.vy = event.vy;
    rec.static_residual = event.static_residual;
    rec.command = command_name(event.command.kind);
    if (event.state.camera_suspect && event.command.kind != CommandKind::CameraError)
        rec.command += "|CAMERA_ERROR";
    rec.force = event.force;
    return rec;
}

void write_events_jsonl(const std::vector<EventRecord>& records,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    for (const EventRecord& rec : records) {
        out << "{\"frame\":" << rec.frame << ",\"state\":\"" << rec.state
            << "\",\"vx\":" << fmt_double(rec.vx) << ",\"vy\":" << fmt_double(rec.vy)
            << ",\"static_residual\":" << fmt_double(rec.static_residual) << ",\"command\":\""
            << rec.command << "\",\"force\":" << fmt_double(rec.force) << "}\n";
    }
    if (!out) throw FormatError(path.string() + ": write failed");
}

std::vector<EventRecord> read_events_jsonl(const std::filesystem::path& path) {
    const std::vector<std::string> lines = split_lines(path);
    std::vector<EventRecord> records;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (is_blank(lines[i])) continue;
        const nlohmann::json obj =
            parse_line(path, i + 1, lines[i], {"state", "command"},
                       {"frame", "vx", "vy", "static_residual", "force"});
        EventRecord rec;
        rec.frame = obj["frame"].get<int>();
        rec.state = obj["state"].get<std::string>();
        rec.vx = obj["vx"].get<double>();
        rec.vy = obj["vy"].get<double>();
        rec.static_residual = obj["static_residual"].get<double>();
        rec.command = obj["command"].get<std::string>();
        rec.force = obj["force"].get<double>();
        records.push_back(std::move(rec));
    }
    return records;
}

void write_truth_jsonl(const std::vector<TruthRecord>& records,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    for (const TruthRecord& rec : records) {
        out << "{\"frame\":" << rec.frame << ",\"true_vx\":" << fmt_double(rec.true_vx)
            << ",\"true_vy\":" << fmt_double(rec.true_vy) << ",\"true_state\":\"" << rec.true_state
            << "\"}\n";
    }
    if (!out) throw FormatError(path.string() + ": write failed");
}

std::vector<TruthRecord> read_truth_jsonl(const std::filesystem::path& path) {
    const std::vector<std::string> lines = split_lines(path);
    std::vector<TruthRecord> records;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (is_blank(lines[i])) continue;
        const nlohmann::json obj = parse_line(path, i + 1, lines[i], {"true_state"},
                                              {"frame", "true_vx", "true_vy"});
        TruthRecord rec;
        rec.frame = obj["frame"].get<int>();
        rec.true_vx = obj["true_vx"].get<double>();
        rec.true_vy = obj["true_vy"].get<double>();
        rec.true_state = obj["true_state"].get<std::string>();
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace gripflow
