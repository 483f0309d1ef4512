#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gripflow/errors.hpp"
#include "gripflow/io.hpp"

namespace gripflow {

namespace {

constexpr float kFloTag = 202021.25f; // reads as "PIEH" in ASCII

void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
    std::string out;
    out.reserve(12 + flow.u.size() * 8);
    put_u32le(out, std::bit_cast<std::uint32_t>(kFloTag));
    put_u32le(out, static_cast<std::uint32_t>(flow.width));
    put_u32le(out, static_cast<std::uint32_t>(flow.height));
    for (size_t i = 0; i < flow.u.size(); ++i) {
        put_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(flow.u[i])));
        put_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(flow.v[i])));
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw FormatError(path.string() + ": cannot open for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw FormatError(path.string() + ": write failed");
}

FlowField read_flo(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw FormatError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << file.rdbuf();
    const std::string data = std::move(buf).str();
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());

    if (data.size() < 12) throw FormatError(path.string() + ": truncated header");
    const float tag = std::bit_cast<float>(get_u32le(bytes));
    if (tag != kFloTag) throw FormatError(path.string() + ": magic mismatch");
    const auto width = static_cast<std::int32_t>(get_u32le(bytes + 4));
    const auto height = static_cast<std::int32_t>(get_u32le(bytes + 8));
    if (width < 1 || height < 1)
        throw FormatError(path.string() + ": invalid dimensions " + std::to_string(width) + "x" +
                          std::to_string(height));

    const size_t expected = 12 + static_cast<size_t>(width) * height * 8;
    if (data.size() != expected)
        throw FormatError(path.string() + ": size mismatch, expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(data.size()));

    FlowField flow(width, height);
    for (size_t i = 0; i < flow.u.size(); ++i) {
        flow.u[i] = std::bit_cast<float>(get_u32le(bytes + 12 + i * 8));
        flow.v[i] = std::bit_cast<float>(get_u32le(bytes + 16 + i * 8));
    }
    return flow;
}

} // namespace gripflow
